//! Dense complex linear algebra for small qudit systems: states, operators,
//! measurements, channels and entropic quantities.

mod channel;
mod entropy;
pub mod kernel;
mod operators;
pub mod random;
mod state;

pub use channel::Channel;
pub use entropy::{
    entropy_from_eigenvalues, fidelity, hermitian_eigenvalues, purify, trace_distance, transmission_information,
    transmission_information_purified, von_neumann_entropy,
};
pub use operators::{
    bell_measurement, computational_measurement, dft, dual_basis_state, max_entangled, pauli_x, pauli_z, vectorize,
    weyl, MeasurementOutcome, ProjectiveMeasurement, UnitaryOperator,
};
pub use state::{DensityOperator, StateVector};

pub use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix.
pub type Matrix = nalgebra::DMatrix<Complex64>;

/// Equality tolerance used throughout unless a caller overrides it.
pub const TOL: f64 = 1e-9;

/// Eigenvalues below this are treated as exact zeros in entropies.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Largest number of amplitudes any state or operator side may span.
pub const MAX_AMPLITUDES: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QError {
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("matrix is identically zero")]
    ZeroMatrix,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("state space of {requested} amplitudes exceeds the limit of {limit}")]
    ResourceGuard { requested: f64, limit: usize },
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Kronecker product of two matrices.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

pub fn identity(d: usize) -> Matrix {
    Matrix::identity(d, d)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub(crate) fn is_hermitian(m: &Matrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}
