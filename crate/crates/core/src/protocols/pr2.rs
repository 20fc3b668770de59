use std::sync::Arc;

use crate::fabric::{slots, FabricError, InputSet, Op, Owner, ProtocolSpec, Register, RoundSpec, Slot};
use crate::qcore::{dft, kron, pauli_x, pauli_z, Matrix};

/// Controlled addition U = Σ_ℓ |ℓ⟩⟨ℓ| ⊗ U_ℓ with U_ℓ|j'⟩|j⟩ = |j+j' mod d⟩|j⟩
/// on [control, accumulator, H_1..H_f].
fn controlled_add(control: &str, acc: &str, messages: &[String], d: usize) -> Op {
    let mut targets: Vec<Slot> = slots([control, acc]);
    targets.extend(slots(messages));
    Op::permute(targets, move |v| {
        let mut out = v.to_vec();
        out[1] = (v[1] + v[2 + v[0]]) % d;
        out
    })
}

fn message_registers(dims: &[usize]) -> (Vec<String>, Vec<Register>) {
    let names: Vec<String> = (1..=dims.len()).map(|l| format!("H{l}")).collect();
    let regs = names
        .iter()
        .zip(dims)
        .map(|(n, &d)| Register::new(n.clone(), d, Owner::Server))
        .collect();
    (names, regs)
}

/// Protocol 1. With `with_measurement = false` the server skips the
/// computational-basis measurement of H_1..H_f.
pub fn build_pr2(dims: &[usize], with_measurement: bool) -> Result<ProtocolSpec, FabricError> {
    super::check_dims(dims)?;
    let f = dims.len();
    let d = *dims.iter().max().expect("non-empty");
    let (names, msg_regs) = message_registers(dims);

    let mut registers = vec![
        Register::new("K", f, Owner::User),
        Register::new("H0", d, Owner::Server),
    ];
    registers.extend(msg_regs);

    let mut server = Vec::new();
    if with_measurement {
        for n in &names {
            server.push(Op::measure(slots([n]), n.clone()));
        }
    }
    server.push(controlled_add("K", "H0", &names, d));

    Ok(ProtocolSpec {
        name: if with_measurement { "pr2" } else { "pr2-nomeas" }.into(),
        message_dims: dims.to_vec(),
        input_set: InputSet::ClassicalBasis,
        unitary_type: !with_measurement,
        registers,
        message_registers: names,
        prior_entanglement: Vec::new(),
        server_setup: Vec::new(),
        rounds: vec![RoundSpec {
            user: Arc::new(move |k| vec![Op::permute(slots(["K"]), move |v| vec![(v[0] + k - 1) % f])]),
            query: vec!["K".into()],
            server,
            answer: vec!["K".into(), "H0".into()],
        }],
        reconstruction: Arc::new(|_| vec![Op::measure(slots(["H0"]), "out")]),
        output: Arc::new(|_| vec!["H0".into()]),
    })
}

/// Where Protocol 2's second controlled addition writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AncillaMode {
    /// H'_0 for 𝒦_0 and H'_1 for 𝒦_1, as in the preparation step.
    Distinct,
    /// Both additions write into H'_0.
    Shared,
}

/// Protocol 2 with distinct answer ancillas.
pub fn build_pr2b(dims: &[usize]) -> Result<ProtocolSpec, FabricError> {
    build_pr2b_with(dims, AncillaMode::Distinct)
}

/// Protocol 2. The user's coins A and B are modelled by measuring uniform
/// superpositions on the registers RA, RB.
pub fn build_pr2b_with(dims: &[usize], mode: AncillaMode) -> Result<ProtocolSpec, FabricError> {
    super::check_dims(dims)?;
    let f = dims.len();
    let d = *dims.iter().max().expect("non-empty");
    let (names, msg_regs) = message_registers(dims);

    let mut registers = vec![
        Register::new("RA", 2, Owner::User),
        Register::new("RB", f, Owner::User),
        Register::new("K0", f, Owner::User),
        Register::new("K1", f, Owner::User),
        Register::new("H'0", d, Owner::Server),
        Register::new("H'1", d, Owner::Server),
    ];
    registers.extend(msg_regs);

    let f2 = dft(2)?.into_matrix();
    let ff = dft(f)?.into_matrix();
    let x = pauli_x(f)?;
    let z = pauli_z(f)?;
    let user = Arc::new(move |k: usize| {
        let target = x.pow(k - 1).into_matrix();
        let z = z.clone();
        let ff = ff.clone();
        vec![
            Op::unitary(slots(["RA"]), f2.clone()),
            Op::unitary(slots(["RB"]), ff.clone()),
            Op::measure(slots(["RA"]), "A"),
            Op::measure(slots(["RB"]), "B"),
            Op::controlled(slots(["RA", "RB"]), slots(["K0", "K1"]), move |c| {
                let decoy: Matrix = z.pow(c[1]).matrix() * &ff;
                Some(if c[0] == 0 {
                    kron(&target, &decoy)
                } else {
                    kron(&decoy, &target)
                })
            }),
        ]
    });

    let second = match mode {
        AncillaMode::Distinct => "H'1",
        AncillaMode::Shared => "H'0",
    };
    let swap = swap_matrix(d);
    Ok(ProtocolSpec {
        name: match mode {
            AncillaMode::Distinct => "pr2b",
            AncillaMode::Shared => "pr2b-shared",
        }
        .into(),
        message_dims: dims.to_vec(),
        input_set: InputSet::ClassicalBasis,
        unitary_type: false,
        registers,
        message_registers: names.clone(),
        prior_entanglement: Vec::new(),
        server_setup: Vec::new(),
        rounds: vec![RoundSpec {
            user,
            query: vec!["K0".into(), "K1".into()],
            server: vec![
                controlled_add("K0", "H'0", &names, d),
                controlled_add("K1", second, &names, d),
            ],
            answer: vec!["K0".into(), "H'0".into(), "K1".into(), "H'1".into()],
        }],
        reconstruction: Arc::new(move |_| {
            let swap = swap.clone();
            vec![
                Op::controlled(slots(["RA"]), slots(["H'0", "H'1"]), move |c| {
                    (c[0] == 1).then(|| swap.clone())
                }),
                Op::measure(slots(["H'0"]), "out"),
            ]
        }),
        output: Arc::new(|_| vec!["H'0".into()]),
    })
}

fn swap_matrix(d: usize) -> Matrix {
    let mut m = Matrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = num_complex::Complex64::new(1.0, 0.0);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_is_an_involution() {
        let s = swap_matrix(3);
        assert!(crate::qcore::max_abs_diff(&(&s * &s), &crate::qcore::identity(9)) < 1e-15);
    }
}
