use num_complex::Complex64;

use super::kernel::ZERO;
use super::{is_hermitian, Channel, DensityOperator, Matrix, QError, StateVector, EIGEN_CLAMP, TOL};

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// −Σ λ log₂ λ over eigenvalues above the clamp.
pub fn entropy_from_eigenvalues(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&l| l > EIGEN_CLAMP).map(|&l| -l * l.log2()).sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64, QError> {
    if !is_hermitian(rho.matrix(), TOL) {
        return Err(QError::InvalidState("entropy of a non-Hermitian operator".into()));
    }
    Ok(entropy_from_eigenvalues(&rho.eigenvalues()))
}

/// (1/2)‖ρ − σ‖₁.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64, QError> {
    if rho.dims() != sigma.dims() {
        return Err(QError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            rho.dims(),
            sigma.dims()
        )));
    }
    let diff = rho.matrix() - sigma.matrix();
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}

fn psd_sqrt(m: &Matrix) -> Matrix {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut out = Matrix::zeros(n, n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        out += (v * v.adjoint()) * Complex64::new(l.sqrt(), 0.0);
    }
    out
}

/// Uhlmann fidelity (Tr √(√ρ σ √ρ))², squared convention.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64, QError> {
    if rho.dims() != sigma.dims() {
        return Err(QError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            rho.dims(),
            sigma.dims()
        )));
    }
    let s = psd_sqrt(rho.matrix());
    let inner = &s * sigma.matrix() * &s;
    let inner = (&inner + inner.adjoint()) * Complex64::new(0.5, 0.0);
    let tr: f64 = hermitian_eigenvalues(&inner)
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|l| l.sqrt())
        .sum();
    Ok((tr * tr).min(1.0))
}

/// Canonical purification Σ √λ_i |v_i⟩|i⟩ with a reference register of
/// dimension dim(ρ) appended last.
pub fn purify(rho: &DensityOperator) -> Result<StateVector, QError> {
    let n = rho.dim();
    let eig = nalgebra::SymmetricEigen::new(rho.matrix().clone());
    let mut amps = vec![ZERO; n * n];
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= EIGEN_CLAMP {
            continue;
        }
        let w = l.sqrt();
        for s in 0..n {
            amps[s * n + i] = eig.eigenvectors[(s, i)] * w;
        }
    }
    let mut dims = rho.dims().to_vec();
    dims.push(n);
    let (psi, _) = StateVector::normalized(dims, amps)?;
    Ok(psi)
}

/// I(ρ, Γ) = H(ρ) + H(Γ(ρ)) − H((ι ⊗ Γ)|ψ⟩⟨ψ|) using the canonical purification.
pub fn transmission_information(rho: &DensityOperator, gamma: &Channel) -> Result<f64, QError> {
    if rho.dims() != gamma.input_dims() {
        return Err(QError::DimensionMismatch(format!(
            "channel input {:?} vs state {:?}",
            gamma.input_dims(),
            rho.dims()
        )));
    }
    let psi = purify(rho)?;
    transmission_information_purified(&psi, gamma)
}

/// Same quantity computed from a caller-supplied purification whose last
/// register is the reference and whose other registers match Γ's input.
pub fn transmission_information_purified(psi: &StateVector, gamma: &Channel) -> Result<f64, QError> {
    let nreg = psi.dims().len();
    if nreg < 2 || psi.dims()[..nreg - 1] != *gamma.input_dims() {
        return Err(QError::DimensionMismatch(format!(
            "purification {:?} vs channel input {:?}",
            psi.dims(),
            gamma.input_dims()
        )));
    }
    let din: usize = gamma.input_dims().iter().product();
    let dout: usize = gamma.output_dims().iter().product();
    let r = psi.dims()[nreg - 1];
    let system: Vec<usize> = (0..nreg - 1).collect();
    let rho = psi.reduced(&system)?;
    let h_in = von_neumann_entropy(&rho)?;
    let h_out = von_neumann_entropy(&gamma.apply(&rho)?)?;

    // Ψ as a din × r matrix; each Kraus map acts on its rows.
    let big_psi = Matrix::from_fn(din, r, |s, z| psi.amplitudes()[s * r + z]);
    let mut joint = Matrix::zeros(dout * r, dout * r);
    for k in gamma.kraus() {
        let out = k * &big_psi;
        let v = Matrix::from_fn(dout * r, 1, |i, _| out[(i / r, i % r)]);
        joint += &v * v.adjoint();
    }
    let h_joint = entropy_from_eigenvalues(&hermitian_eigenvalues(&joint));
    Ok(h_in + h_out - h_joint)
}
