use std::collections::HashMap;
use std::sync::Arc;

use crate::fabric::{slots, FabricError, InputSet, Op, Owner, PriorEntanglement, ProtocolSpec, Register, Slot};
use crate::qcore::{bell_measurement, vectorize, weyl, Matrix};

/// Maps the Bell vector |X^a Z^b⟩⟩ to the basis state |a⟩|b⟩.
fn bell_to_computational(d: usize) -> Result<Matrix, FabricError> {
    let mut m = Matrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            let (v, _) = vectorize(weyl(d, a as i64, b as i64)?.matrix())?;
            for (j, amp) in v.amplitudes().iter().enumerate() {
                m[(a * d + b, j)] = amp.conj();
            }
        }
    }
    Ok(m)
}

/// Teleportation correction for outcome (a, b).
///
/// After the Bell measurement on X_ℓ ⊗ Y'_ℓ the pair R_ℓ ⊗ Y_ℓ holds
/// (I ⊗ Z^{-b} X^{-a})|φ_ℓ⟩, so the exact inverse is X^a Z^b.
pub(crate) fn correction(d: usize, a: usize, b: usize) -> Result<Matrix, FabricError> {
    Ok(weyl(d, a as i64, b as i64)?.into_matrix())
}

/// Protocol 3 around a C-QPIR protocol whose ℓ-th alphabet has size d_ℓ².
///
/// The server Bell-measures X_ℓ ⊗ Y'_ℓ and relabels the outcome (a, b) as the
/// basis state |a⟩|b⟩ of the pair, which then serves as the inner protocol's
/// ℓ-th message register. The user corrects Y_k controlled by the inner
/// output.
pub fn build_teleport_wrapper(inner: &ProtocolSpec, dims: &[usize]) -> Result<ProtocolSpec, FabricError> {
    super::check_dims(dims)?;
    let f = dims.len();
    if inner.f() != f {
        return Err(FabricError::Definition(format!(
            "inner protocol has {} messages, expected {f}",
            inner.f()
        )));
    }
    for (l, (&d, &di)) in dims.iter().zip(&inner.message_dims).enumerate() {
        if di != d * d {
            return Err(FabricError::Definition(format!(
                "inner alphabet {} for message {} does not equal {d}² ",
                di,
                l + 1
            )));
        }
    }

    let x: Vec<String> = (1..=f).map(|l| format!("M{l}")).collect();
    let y: Vec<String> = (1..=f).map(|l| format!("Y{l}")).collect();
    let yp: Vec<String> = (1..=f).map(|l| format!("Y'{l}")).collect();

    let map: HashMap<String, Vec<String>> = inner
        .message_registers
        .iter()
        .enumerate()
        .map(|(l, n)| (n.clone(), vec![x[l].clone(), yp[l].clone()]))
        .collect();
    let renamed = inner.renamed(&map);

    let mut registers = Vec::new();
    for l in 0..f {
        registers.push(Register::new(x[l].clone(), dims[l], Owner::Server));
        registers.push(Register::new(y[l].clone(), dims[l], Owner::User));
        registers.push(Register::new(yp[l].clone(), dims[l], Owner::Server));
    }
    registers.extend(
        inner
            .registers
            .iter()
            .filter(|r| !inner.message_registers.contains(&r.name))
            .cloned(),
    );

    let mut prior_entanglement: Vec<PriorEntanglement> = (0..f)
        .map(|l| PriorEntanglement {
            dim: dims[l],
            user: y[l].clone(),
            server: yp[l].clone(),
        })
        .collect();
    prior_entanglement.extend(inner.prior_entanglement.iter().cloned());

    let mut server_setup = Vec::new();
    for l in 0..f {
        let d = dims[l];
        server_setup.push(Op::measure_in(
            slots([&x[l], &yp[l]]),
            bell_measurement(d)?,
            format!("m{}", l + 1),
        ));
        server_setup.push(Op::unitary(slots([&x[l], &yp[l]]), bell_to_computational(d)?));
    }
    server_setup.extend(renamed.server_setup.iter().cloned());

    let corrections: Vec<Vec<Matrix>> = dims
        .iter()
        .map(|&d| {
            (0..d * d)
                .map(|m| correction(d, m / d, m % d))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;
    let corrections = Arc::new(corrections);
    let inner_recon = renamed.reconstruction.clone();
    let inner_out = renamed.output.clone();
    let y_rec = y.clone();
    let reconstruction = Arc::new(move |k: usize| {
        let mut ops = inner_recon(k);
        let table = corrections.clone();
        ops.push(Op::controlled(
            vec![Slot(inner_out(k))],
            slots([&y_rec[k - 1]]),
            move |c| table[k - 1].get(c[0]).cloned(),
        ));
        ops
    });

    let spec = ProtocolSpec {
        name: format!("qwrap:{}", inner.name),
        message_dims: dims.to_vec(),
        input_set: InputSet::PureStates,
        unitary_type: false,
        registers,
        message_registers: x,
        prior_entanglement,
        server_setup,
        rounds: renamed.rounds.clone(),
        reconstruction,
        output: Arc::new(move |k| vec![y[k - 1].clone()]),
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{identity, max_abs_diff};

    #[test]
    fn bell_change_of_basis_is_unitary() {
        for d in 2..=4 {
            let m = bell_to_computational(d).unwrap();
            assert!(max_abs_diff(&(m.adjoint() * &m), &identity(d * d)) < 1e-12);
        }
    }

    #[test]
    fn correction_matches_phase_free_inverse() {
        let d = 3;
        for a in 0..d {
            for b in 0..d {
                let post =
                    weyl(d, 0, -(b as i64)).unwrap().into_matrix() * weyl(d, -(a as i64), 0).unwrap().into_matrix();
                let prod = correction(d, a, b).unwrap() * post;
                assert!(max_abs_diff(&prod, &identity(d)) < 1e-12);
            }
        }
    }
}
