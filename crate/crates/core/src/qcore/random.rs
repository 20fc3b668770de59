//! Seeded random states and operators for property tests and input grids.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{kernel, DensityOperator, Matrix, QError, StateVector, UnitaryOperator};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed pure state.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<StateVector, QError> {
    let n = kernel::checked_size(dims)?;
    let amps = (0..n).map(|_| gaussian(rng)).collect();
    StateVector::normalized(dims.to_vec(), amps).map(|(s, _)| s)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Result<UnitaryOperator, QError> {
    if d == 0 {
        return Err(QError::InvalidDimension(0));
    }
    let qr = ginibre(rng, d, d).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(UnitaryOperator::from_raw(vec![d], q))
}

/// Random mixed state of the given rank (partial trace of a Haar state).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dims: &[usize], rank: usize) -> Result<DensityOperator, QError> {
    let n = kernel::checked_size(dims)?;
    let g = ginibre(rng, n, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace();
    Ok(DensityOperator::from_raw(dims.to_vec(), m / tr))
}
