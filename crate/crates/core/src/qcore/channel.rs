use num_complex::Complex64;

use super::kernel;
use super::{max_abs_diff, weyl, DensityOperator, Matrix, QError, UnitaryOperator, TOL};

/// Completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input_dims: Vec<usize>,
    output_dims: Vec<usize>,
    kraus: Vec<Matrix>,
}

impl Channel {
    pub fn new(input_dims: Vec<usize>, output_dims: Vec<usize>, kraus: Vec<Matrix>) -> Result<Self, QError> {
        let din = kernel::checked_size(&input_dims)?;
        let dout = kernel::checked_size(&output_dims)?;
        if kraus.is_empty() {
            return Err(QError::InvalidOperator("channel without Kraus operators".into()));
        }
        let mut sum = Matrix::zeros(din, din);
        for k in &kraus {
            if k.shape() != (dout, din) {
                return Err(QError::DimensionMismatch(format!(
                    "Kraus operator {:?}, expected ({dout}, {din})",
                    k.shape()
                )));
            }
            sum += k.adjoint() * k;
        }
        if max_abs_diff(&sum, &Matrix::identity(din, din)) > TOL {
            return Err(QError::InvalidOperator("Σ K†K differs from identity".into()));
        }
        Ok(Self {
            input_dims,
            output_dims,
            kraus,
        })
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self, QError> {
        let n = kernel::checked_size(&dims)?;
        Ok(Self {
            input_dims: dims.clone(),
            output_dims: dims,
            kraus: vec![Matrix::identity(n, n)],
        })
    }

    pub fn unitary(u: &UnitaryOperator) -> Self {
        Self {
            input_dims: u.dims().to_vec(),
            output_dims: u.dims().to_vec(),
            kraus: vec![u.matrix().clone()],
        }
    }

    /// ρ ↦ Tr(ρ) I/d, realized by the d² Weyl operators scaled by 1/d.
    pub fn completely_depolarizing(d: usize) -> Result<Self, QError> {
        let mut kraus = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                kraus.push(weyl(d, a as i64, b as i64)?.into_matrix() / Complex64::new(d as f64, 0.0));
            }
        }
        Self::new(vec![d], vec![d], kraus)
    }

    pub fn input_dims(&self) -> &[usize] {
        &self.input_dims
    }

    pub fn output_dims(&self) -> &[usize] {
        &self.output_dims
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator, QError> {
        if rho.dims() != self.input_dims.as_slice() {
            return Err(QError::DimensionMismatch(format!(
                "channel input {:?} vs state {:?}",
                self.input_dims,
                rho.dims()
            )));
        }
        let dout: usize = self.output_dims.iter().product();
        let mut out = Matrix::zeros(dout, dout);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        Ok(DensityOperator::from_raw(self.output_dims.clone(), out))
    }
}
