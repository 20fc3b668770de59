//! Entropy through the characteristic polynomial, independent of the
//! symmetric eigensolver: Faddeev–LeVerrier coefficients, then Aberth
//! iteration for the roots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::{entropy_from_eigenvalues, identity, von_neumann_entropy, DensityOperator, Matrix, QError};

/// Largest dimension accepted; the coefficient recursion loses accuracy
/// quickly beyond this.
pub const CHARPOLY_MAX_DIM: usize = 16;

const ZERO_COEFF: f64 = 1e-12;
const CLUSTER_GAP: f64 = 1e-2;
const SPLIT_IM: f64 = 1e-10;

/// Coefficients c_0..c_n of det(xI − A), lowest degree first.
fn faddeev_leverrier(a: &Matrix) -> Vec<Complex64> {
    let n = a.nrows();
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let id = identity(n);
    let mut m = Matrix::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * c[n - k + 1];
        let am = a * &m;
        c[n - k] = -am.trace() / k as f64;
    }
    c
}

fn horner(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ci in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ci;
    }
    (p, dp)
}

/// Roots of a monic polynomial by Aberth–Ehrlich iteration.
fn aberth(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let center = -c[n - 1] / n as f64;
    let radius = c[..n].iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * (j as f64 + 0.25) / n as f64;
            center + Complex64::from_polar(radius.min(1.0), t)
        })
        .collect();
    for _ in 0..1000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(c, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm());
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(i, &x)| x * i as f64).collect()
}

/// Real parts of the roots, with numerically split multiple roots repaired.
/// A Hermitian matrix has real eigenvalues, so a cluster of nearby roots
/// with imaginary parts is one m-fold root spread by about eps^(1/m). It is
/// a simple root of p^(m−1), where Newton converges cleanly.
fn merge_split_roots(c: &[Complex64], mut z: Vec<Complex64>) -> Vec<f64> {
    z.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut out = Vec::with_capacity(z.len());
    let mut i = 0;
    while i < z.len() {
        let mut j = i + 1;
        while j < z.len() && (z[j].re - z[j - 1].re).abs() < CLUSTER_GAP {
            j += 1;
        }
        let cluster = &z[i..j];
        let m = cluster.len();
        if m > 1 && cluster.iter().any(|x| x.im.abs() > SPLIT_IM) {
            let mut dc = c.to_vec();
            for _ in 1..m {
                dc = derivative(&dc);
            }
            let mut x = Complex64::new(cluster.iter().map(|x| x.re).sum::<f64>() / m as f64, 0.0);
            for _ in 0..50 {
                let (p, dp) = horner(&dc, x);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                x -= step;
                if step.norm() < 1e-16 {
                    break;
                }
            }
            out.extend(std::iter::repeat_n(x.re, m));
        } else {
            out.extend(cluster.iter().map(|x| x.re));
        }
        i = j;
    }
    out
}

/// Eigenvalues of ρ from its characteristic polynomial, real parts, ascending.
pub fn charpoly_eigenvalues(rho: &DensityOperator) -> Result<Vec<f64>, QError> {
    let n = rho.dim();
    if n > CHARPOLY_MAX_DIM {
        return Err(QError::DimensionMismatch(format!(
            "characteristic polynomial path supports dimension ≤ {CHARPOLY_MAX_DIM}, got {n}"
        )));
    }
    let c = faddeev_leverrier(rho.matrix());
    // Exact zero eigenvalues make multiple roots at 0; divide them out.
    let zeros = c.iter().take_while(|x| x.norm() < ZERO_COEFF).count().min(n);
    let mut eigs = merge_split_roots(&c[zeros..], aberth(&c[zeros..]));
    eigs.extend(std::iter::repeat_n(0.0, zeros));
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyCrossCheck {
    pub eigensolver: f64,
    pub charpoly: f64,
    pub difference: f64,
}

/// Entropy of ρ by both paths.
pub fn cross_check_entropy(rho: &DensityOperator) -> Result<EntropyCrossCheck, QError> {
    let a = von_neumann_entropy(rho)?;
    let b = entropy_from_eigenvalues(&charpoly_eigenvalues(rho)?);
    Ok(EntropyCrossCheck {
        eigensolver: a,
        charpoly: b,
        difference: (a - b).abs(),
    })
}
