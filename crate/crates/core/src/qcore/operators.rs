use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernel::{self, ONE, ZERO};
use super::{c, is_hermitian, max_abs_diff, Matrix, QError, StateVector, EIGEN_CLAMP, TOL};

fn check_dim(d: usize) -> Result<(), QError> {
    if d == 0 {
        Err(QError::InvalidDimension(0))
    } else {
        Ok(())
    }
}

/// ω = exp(2πi/d).
fn omega_pow(d: usize, e: i64) -> Complex64 {
    let e = e.rem_euclid(d as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * e / d as f64)
}

/// Unitary acting on a list of registers.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    dims: Vec<usize>,
    matrix: Matrix,
}

impl UnitaryOperator {
    pub fn new(dims: Vec<usize>, matrix: Matrix) -> Result<Self, QError> {
        let n = kernel::checked_size(&dims)?;
        if matrix.shape() != (n, n) {
            return Err(QError::DimensionMismatch(format!(
                "{:?} matrix for dims {dims:?}",
                matrix.shape()
            )));
        }
        let gram = matrix.adjoint() * &matrix;
        if max_abs_diff(&gram, &Matrix::identity(n, n)) > TOL {
            return Err(QError::InvalidOperator("U†U differs from identity".into()));
        }
        Ok(Self { dims, matrix })
    }

    pub(crate) fn from_raw(dims: Vec<usize>, matrix: Matrix) -> Self {
        Self { dims, matrix }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, after: &UnitaryOperator) -> Result<Self, QError> {
        if self.dims != after.dims {
            return Err(QError::DimensionMismatch(
                "composing unitaries on different spaces".into(),
            ));
        }
        Ok(Self {
            dims: self.dims.clone(),
            matrix: &after.matrix * &self.matrix,
        })
    }

    pub fn pow(&self, e: usize) -> Self {
        let n = self.matrix.nrows();
        let mut m = Matrix::identity(n, n);
        for _ in 0..e {
            m = &self.matrix * m;
        }
        Self {
            dims: self.dims.clone(),
            matrix: m,
        }
    }

    pub fn tensor(&self, other: &UnitaryOperator) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            dims,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Full matrix on `dims` with this operator on `targets`, identity elsewhere.
    pub fn embed(&self, dims: &[usize], targets: &[usize]) -> Result<Matrix, QError> {
        let n = kernel::checked_size(dims)?;
        let tdims: Vec<usize> = targets.iter().map(|&t| dims.get(t).copied().unwrap_or(0)).collect();
        if tdims != self.dims {
            return Err(QError::DimensionMismatch(format!(
                "operator on {:?} embedded at registers of dims {tdims:?}",
                self.dims
            )));
        }
        let mut out = Matrix::zeros(n, n);
        let mut col = vec![ZERO; n];
        for j in 0..n {
            col.iter_mut().for_each(|z| *z = ZERO);
            col[j] = ONE;
            kernel::apply_matrix(&mut col, dims, targets, &self.matrix)?;
            for (i, z) in col.iter().enumerate() {
                out[(i, j)] = *z;
            }
        }
        Ok(out)
    }
}

/// Shift operator X_d: |s⟩ ↦ |s+1 mod d⟩.
pub fn pauli_x(d: usize) -> Result<UnitaryOperator, QError> {
    check_dim(d)?;
    let mut m = Matrix::zeros(d, d);
    for s in 0..d {
        m[((s + 1) % d, s)] = ONE;
    }
    Ok(UnitaryOperator::from_raw(vec![d], m))
}

/// Clock operator Z_d = diag(ω^s).
pub fn pauli_z(d: usize) -> Result<UnitaryOperator, QError> {
    check_dim(d)?;
    let mut m = Matrix::zeros(d, d);
    for s in 0..d {
        m[(s, s)] = omega_pow(d, s as i64);
    }
    Ok(UnitaryOperator::from_raw(vec![d], m))
}

/// X_d^a Z_d^b for signed exponents.
pub fn weyl(d: usize, a: i64, b: i64) -> Result<UnitaryOperator, QError> {
    check_dim(d)?;
    let a = a.rem_euclid(d as i64) as usize;
    let mut m = Matrix::zeros(d, d);
    for s in 0..d {
        m[((s + a) % d, s)] = omega_pow(d, b * s as i64);
    }
    Ok(UnitaryOperator::from_raw(vec![d], m))
}

/// Discrete Fourier transform: |j⟩ ↦ |u_j⟩.
pub fn dft(d: usize) -> Result<UnitaryOperator, QError> {
    check_dim(d)?;
    let norm = 1.0 / (d as f64).sqrt();
    let mut m = Matrix::zeros(d, d);
    for k in 0..d {
        for j in 0..d {
            m[(k, j)] = omega_pow(d, (k * j) as i64) * norm;
        }
    }
    Ok(UnitaryOperator::from_raw(vec![d], m))
}

/// |I_d⟩⟩ = (1/√d) Σ |s,s⟩.
pub fn max_entangled(d: usize) -> Result<StateVector, QError> {
    check_dim(d)?;
    let a = c(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; d * d];
    for s in 0..d {
        amps[s * d + s] = a;
    }
    Ok(StateVector::from_raw(vec![d, d], amps))
}

/// |M⟩⟩ for a d₁×d₂ matrix: entries scaled by 1/√d₂, then renormalized.
/// Returns the state and the norm before renormalization.
pub fn vectorize(m: &Matrix) -> Result<(StateVector, f64), QError> {
    let (d1, d2) = m.shape();
    if d1 == 0 || d2 == 0 {
        return Err(QError::InvalidDimension(0));
    }
    if m.iter().all(|z| z.norm() == 0.0) {
        return Err(QError::ZeroMatrix);
    }
    let scale = 1.0 / (d2 as f64).sqrt();
    let mut amps = Vec::with_capacity(d1 * d2);
    for s in 0..d1 {
        for t in 0..d2 {
            amps.push(m[(s, t)] * scale);
        }
    }
    StateVector::normalized(vec![d1, d2], amps)
}

/// |u_j⟩ = (1/√d) Σ_k e^{2πi kj/d} |k⟩.
pub fn dual_basis_state(d: usize, j: usize) -> Result<StateVector, QError> {
    check_dim(d)?;
    if j >= d {
        return Err(QError::IndexOutOfRange { index: j, bound: d });
    }
    let norm = 1.0 / (d as f64).sqrt();
    let amps = (0..d).map(|k| omega_pow(d, (k * j) as i64) * norm).collect();
    Ok(StateVector::from_raw(vec![d], amps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub label: Vec<usize>,
    pub projector: Matrix,
}

/// Complete set of orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    dims: Vec<usize>,
    outcomes: Vec<MeasurementOutcome>,
}

impl ProjectiveMeasurement {
    pub fn new(dims: Vec<usize>, outcomes: Vec<MeasurementOutcome>) -> Result<Self, QError> {
        let n = kernel::checked_size(&dims)?;
        let mut sum = Matrix::zeros(n, n);
        for (i, o) in outcomes.iter().enumerate() {
            let p = &o.projector;
            if p.shape() != (n, n) {
                return Err(QError::DimensionMismatch(format!(
                    "projector {:?} is {:?}",
                    o.label,
                    p.shape()
                )));
            }
            if !is_hermitian(p, TOL) {
                return Err(QError::InvalidOperator(format!(
                    "projector {:?} not Hermitian",
                    o.label
                )));
            }
            if max_abs_diff(&(p * p), p) > TOL {
                return Err(QError::InvalidOperator(format!(
                    "projector {:?} not idempotent",
                    o.label
                )));
            }
            for other in &outcomes[..i] {
                if (p * &other.projector).iter().any(|z| z.norm() > TOL) {
                    return Err(QError::InvalidOperator(format!(
                        "projectors {:?} and {:?} overlap",
                        other.label, o.label
                    )));
                }
            }
            sum += p;
        }
        if max_abs_diff(&sum, &Matrix::identity(n, n)) > TOL {
            return Err(QError::InvalidOperator("projectors do not sum to identity".into()));
        }
        Ok(Self { dims, outcomes })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn outcomes(&self) -> &[MeasurementOutcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Post-measurement branches `(probability, state, outcome index)` with
    /// probabilities below the clamp dropped.
    pub fn measure(&self, state: &StateVector, targets: &[usize]) -> Result<Vec<(f64, StateVector, usize)>, QError> {
        let mut out = Vec::new();
        for (i, o) in self.outcomes.iter().enumerate() {
            let mut amps = state.amplitudes().to_vec();
            let tdims: Vec<usize> = targets
                .iter()
                .map(|&t| state.dims().get(t).copied().unwrap_or(0))
                .collect();
            if tdims != self.dims {
                return Err(QError::DimensionMismatch(format!(
                    "measurement on {:?} applied to registers of dims {tdims:?}",
                    self.dims
                )));
            }
            kernel::apply_matrix(&mut amps, state.dims(), targets, &o.projector)?;
            let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if p > EIGEN_CLAMP {
                let (s, _) = StateVector::normalized(state.dims().to_vec(), amps)?;
                out.push((p, s, i));
            }
        }
        Ok(out)
    }

    /// Orthonormal basis adapted to the projectors: the columns of the
    /// returned matrix, each tagged with the outcome whose range holds it.
    pub fn adapted_basis(&self) -> (Matrix, Vec<usize>) {
        let n = self.dims.iter().product();
        let mut basis = Matrix::zeros(n, n);
        let mut tags = Vec::with_capacity(n);
        let mut col = 0;
        for (i, o) in self.outcomes.iter().enumerate() {
            let eig = nalgebra::SymmetricEigen::new(o.projector.clone());
            for (k, &ev) in eig.eigenvalues.iter().enumerate() {
                if ev > 0.5 && col < n {
                    basis.set_column(col, &eig.eigenvectors.column(k));
                    tags.push(i);
                    col += 1;
                }
            }
        }
        (basis, tags)
    }
}

/// Computational-basis measurement on registers of the given dims.
pub fn computational_measurement(dims: &[usize]) -> Result<ProjectiveMeasurement, QError> {
    let n = kernel::checked_size(dims)?;
    let outcomes = (0..n)
        .map(|j| {
            let mut p = Matrix::zeros(n, n);
            p[(j, j)] = ONE;
            MeasurementOutcome {
                label: kernel::digits_of(j, dims),
                projector: p,
            }
        })
        .collect();
    Ok(ProjectiveMeasurement {
        dims: dims.to_vec(),
        outcomes,
    })
}

/// Generalized Bell measurement {|X^a Z^b⟩⟩}; outcome (a, b) sits at index a·d + b.
pub fn bell_measurement(d: usize) -> Result<ProjectiveMeasurement, QError> {
    check_dim(d)?;
    let mut outcomes = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let w = weyl(d, a as i64, b as i64)?;
            let (v, _) = vectorize(w.matrix())?;
            let col = v.to_column();
            outcomes.push(MeasurementOutcome {
                label: vec![a, b],
                projector: &col * col.adjoint(),
            });
        }
    }
    Ok(ProjectiveMeasurement {
        dims: vec![d, d],
        outcomes,
    })
}
