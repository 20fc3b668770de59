use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{self, ONE, ZERO};
use super::{is_hermitian, Matrix, QError, UnitaryOperator, TOL};

/// Pure state over a tensor product of qudit registers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Build a state, checking finiteness and unit norm.
    pub fn new(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self, QError> {
        let n = kernel::checked_size(&dims)?;
        if amps.len() != n {
            return Err(QError::DimensionMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QError::InvalidState("non-finite amplitude".into()));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOL {
            return Err(QError::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { dims, amps })
    }

    /// Normalize arbitrary amplitudes; returns the state and the original norm.
    pub fn normalized(dims: Vec<usize>, mut amps: Vec<Complex64>) -> Result<(Self, f64), QError> {
        let n = kernel::checked_size(&dims)?;
        if amps.len() != n {
            return Err(QError::DimensionMismatch(format!(
                "{} amplitudes for dims {dims:?}",
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(QError::InvalidState("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok((Self { dims, amps }, norm))
    }

    /// Computational basis state with the given per-register digits.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self, QError> {
        let n = kernel::checked_size(&dims)?;
        if digits.len() != dims.len() {
            return Err(QError::DimensionMismatch(format!(
                "{} digits for {} registers",
                digits.len(),
                dims.len()
            )));
        }
        for (&d, &n) in digits.iter().zip(&dims) {
            if d >= n {
                return Err(QError::IndexOutOfRange { index: d, bound: n });
            }
        }
        let mut amps = vec![ZERO; n];
        amps[kernel::index_of(digits, &dims)] = ONE;
        Ok(Self { dims, amps })
    }

    /// Already-normalized amplitudes from trusted internal code.
    pub(crate) fn from_raw(dims: Vec<usize>, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), amps.len());
        Self { dims, amps }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, QError> {
        if self.dims != other.dims {
            return Err(QError::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, QError> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        kernel::checked_size(&dims)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { dims, amps })
    }

    /// Apply a unitary on the listed registers, identity elsewhere.
    pub fn apply_unitary(&mut self, u: &UnitaryOperator, targets: &[usize]) -> Result<(), QError> {
        let tdims: Vec<usize> = targets
            .iter()
            .map(|&t| {
                self.dims.get(t).copied().ok_or(QError::IndexOutOfRange {
                    index: t,
                    bound: self.dims.len(),
                })
            })
            .collect::<Result<_, _>>()?;
        if tdims != u.dims() {
            return Err(QError::DimensionMismatch(format!(
                "unitary on {:?} applied to registers of dims {tdims:?}",
                u.dims()
            )));
        }
        kernel::apply_matrix(&mut self.amps, &self.dims, targets, u.matrix())
    }

    /// Column vector view.
    pub fn to_column(&self) -> Matrix {
        Matrix::from_iterator(self.amps.len(), 1, self.amps.iter().copied())
    }

    pub fn density(&self) -> DensityOperator {
        let v = self.to_column();
        DensityOperator {
            dims: self.dims.clone(),
            matrix: &v * v.adjoint(),
        }
    }

    /// Reduced state on `keep` (in that order).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator, QError> {
        let m = kernel::bipartition(&self.amps, &self.dims, keep)?;
        Ok(DensityOperator {
            dims: keep.iter().map(|&k| self.dims[k]).collect(),
            matrix: &m * m.adjoint(),
        })
    }

    /// Debug dump: `{"dims": [...], "amps": [[re, im], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dims": self.dims,
            "amps": self.amps.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
        })
    }
}

/// Mixed state over a tensor product of qudit registers.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    matrix: Matrix,
}

impl DensityOperator {
    /// Validated constructor: Hermitian, unit trace, positive semidefinite.
    pub fn new(dims: Vec<usize>, matrix: Matrix) -> Result<Self, QError> {
        let n = kernel::checked_size(&dims)?;
        if matrix.shape() != (n, n) {
            return Err(QError::DimensionMismatch(format!(
                "{:?} matrix for dims {dims:?}",
                matrix.shape()
            )));
        }
        if matrix.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QError::InvalidState("non-finite entry".into()));
        }
        if !is_hermitian(&matrix, TOL) {
            return Err(QError::InvalidState("not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL || tr.im.abs() > TOL {
            return Err(QError::InvalidState(format!("trace {tr} is not 1")));
        }
        let rho = Self { dims, matrix };
        if let Some(&min) = rho.eigenvalues().first() {
            if min < -TOL {
                return Err(QError::InvalidState(format!("negative eigenvalue {min}")));
            }
        }
        Ok(rho)
    }

    /// Internal constructor for matrices that are density operators by
    /// construction (reduced states, mixtures of valid states).
    pub(crate) fn from_raw(dims: Vec<usize>, matrix: Matrix) -> Self {
        Self { dims, matrix }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self, QError> {
        let n = kernel::checked_size(&dims)?;
        Ok(Self {
            dims,
            matrix: Matrix::identity(n, n) / Complex64::new(n as f64, 0.0),
        })
    }

    /// Real diagonal density operator (one register).
    pub fn diagonal(probs: &[f64]) -> Result<Self, QError> {
        let m = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| Complex64::new(p, 0.0)),
        ));
        Self::new(vec![probs.len()], m)
    }

    /// Σ w_i ρ_i with the weights renormalized.
    pub fn mixture(parts: &[(f64, DensityOperator)]) -> Result<Self, QError> {
        let first = parts
            .first()
            .ok_or_else(|| QError::InvalidState("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if total <= 0.0 {
            return Err(QError::InvalidState("mixture weights sum to zero".into()));
        }
        let mut m = Matrix::zeros(first.1.dim(), first.1.dim());
        for (w, rho) in parts {
            if rho.dims != first.1.dims {
                return Err(QError::DimensionMismatch("mixture components differ".into()));
            }
            m += &rho.matrix * Complex64::new(w / total, 0.0);
        }
        Ok(Self {
            dims: first.1.dims.clone(),
            matrix: m,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        super::hermitian_eigenvalues(&self.matrix)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator, QError> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        kernel::checked_size(&dims)?;
        Ok(Self {
            dims,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Trace out everything except `keep` (kept registers in the order given).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator, QError> {
        let n = self.dims.len();
        for &k in keep {
            if k >= n {
                return Err(QError::IndexOutOfRange { index: k, bound: n });
            }
        }
        let kdims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let kd: usize = kdims.iter().product();
        let lay = kernel::layout(&self.dims, keep);
        let mut out = Matrix::zeros(kd, kd);
        for &base in &lay.bases {
            for (i, &oi) in lay.offsets.iter().enumerate() {
                for (j, &oj) in lay.offsets.iter().enumerate() {
                    out[(i, j)] += self.matrix[(base + oi, base + oj)];
                }
            }
        }
        Ok(Self {
            dims: kdims,
            matrix: out,
        })
    }

    /// U ρ U† with U embedded on `targets`.
    pub fn apply_unitary(&self, u: &UnitaryOperator, targets: &[usize]) -> Result<DensityOperator, QError> {
        let full = u.embed(&self.dims, targets)?;
        Ok(Self {
            dims: self.dims.clone(),
            matrix: &full * &self.matrix * full.adjoint(),
        })
    }

    /// Debug dump as nested `[re, im]` rows.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| {
                        let z = self.matrix[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        serde_json::json!({ "dims": self.dims, "matrix": rows })
    }
}
