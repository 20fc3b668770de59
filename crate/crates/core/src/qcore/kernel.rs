//! Index arithmetic over a row-major tensor product of registers.
//!
//! Register 0 is the slowest-varying digit. All kernels operate on flat
//! amplitude slices and take target registers as indices into `dims`.

use num_complex::Complex64;

use super::{Matrix, QError, MAX_AMPLITUDES};

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major strides for `dims`.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Product of dimensions, refusing anything beyond the amplitude guard.
pub fn checked_size(dims: &[usize]) -> Result<usize, QError> {
    let mut total: usize = 1;
    for &d in dims {
        if d == 0 {
            return Err(QError::InvalidDimension(0));
        }
        total = total
            .checked_mul(d)
            .filter(|&t| t <= MAX_AMPLITUDES)
            .ok_or(QError::ResourceGuard {
                requested: dims.iter().map(|&d| d as f64).product(),
                limit: MAX_AMPLITUDES,
            })?;
    }
    Ok(total)
}

/// Split a flat index into per-register digits.
pub fn digits_of(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = index % dims[i];
        index /= dims[i];
    }
    out
}

/// Combine per-register digits into a flat index.
pub fn index_of(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

fn check_targets(dims: &[usize], targets: &[usize]) -> Result<(), QError> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= dims.len() {
            return Err(QError::IndexOutOfRange {
                index: t,
                bound: dims.len(),
            });
        }
        if targets[..i].contains(&t) {
            return Err(QError::DimensionMismatch(format!("register {t} targeted twice")));
        }
    }
    Ok(())
}

/// Offsets of every combined target index relative to a base index, plus the
/// base indices (all target digits zero).
pub(crate) struct Layout {
    pub offsets: Vec<usize>,
    pub bases: Vec<usize>,
}

pub(crate) fn layout(dims: &[usize], targets: &[usize]) -> Layout {
    let st = strides(dims);
    let tdims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let tsize: usize = tdims.iter().product();
    let offsets = (0..tsize)
        .map(|j| digits_of(j, &tdims).iter().zip(targets).map(|(&d, &t)| d * st[t]).sum())
        .collect();

    let rest: Vec<usize> = (0..dims.len()).filter(|i| !targets.contains(i)).collect();
    let rdims: Vec<usize> = rest.iter().map(|&r| dims[r]).collect();
    let rsize: usize = rdims.iter().product();
    let mut bases = Vec::with_capacity(rsize);
    let mut digits = vec![0usize; rest.len()];
    let mut base = 0usize;
    for _ in 0..rsize {
        bases.push(base);
        // odometer increment over the non-target registers
        for pos in (0..rest.len()).rev() {
            let r = rest[pos];
            digits[pos] += 1;
            base += st[r];
            if digits[pos] < dims[r] {
                break;
            }
            base -= st[r] * dims[r];
            digits[pos] = 0;
        }
    }
    Layout { offsets, bases }
}

fn row_major(m: &Matrix) -> Vec<Complex64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Apply a square matrix (not necessarily unitary) to the target registers.
pub fn apply_matrix(amps: &mut [Complex64], dims: &[usize], targets: &[usize], m: &Matrix) -> Result<(), QError> {
    check_targets(dims, targets)?;
    let tsize: usize = targets.iter().map(|&t| dims[t]).product();
    if m.nrows() != tsize || m.ncols() != tsize {
        return Err(QError::DimensionMismatch(format!(
            "operator is {}x{}, targets span {tsize}",
            m.nrows(),
            m.ncols()
        )));
    }
    let lay = layout(dims, targets);
    let mat = row_major(m);
    let mut buf = vec![ZERO; tsize];
    for &base in &lay.bases {
        for (j, &off) in lay.offsets.iter().enumerate() {
            buf[j] = amps[base + off];
        }
        for (i, &off) in lay.offsets.iter().enumerate() {
            let row = &mat[i * tsize..(i + 1) * tsize];
            let mut acc = ZERO;
            for (a, b) in row.iter().zip(&buf) {
                acc += a * b;
            }
            amps[base + off] = acc;
        }
    }
    Ok(())
}

/// Apply `select(control value)` to the targets on each control sector.
/// `None` leaves the sector untouched.
pub fn apply_controlled(
    amps: &mut [Complex64],
    dims: &[usize],
    controls: &[usize],
    targets: &[usize],
    select: &dyn Fn(usize) -> Option<Matrix>,
) -> Result<(), QError> {
    let mut all = controls.to_vec();
    all.extend_from_slice(targets);
    check_targets(dims, &all)?;
    let st = strides(dims);
    let cdims: Vec<usize> = controls.iter().map(|&c| dims[c]).collect();
    let csize: usize = cdims.iter().product();
    let tsize: usize = targets.iter().map(|&t| dims[t]).product();
    let mut table: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(csize);
    for c in 0..csize {
        let m = select(c);
        if let Some(m) = &m {
            if m.nrows() != tsize || m.ncols() != tsize {
                return Err(QError::DimensionMismatch(format!(
                    "controlled operator is {}x{}, targets span {tsize}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        table.push(m.as_ref().map(row_major));
    }
    let lay = layout(dims, targets);
    let mut buf = vec![ZERO; tsize];
    for &base in &lay.bases {
        let cval = controls
            .iter()
            .zip(&cdims)
            .fold(0, |acc, (&c, &n)| acc * n + (base / st[c]) % dims[c]);
        let Some(mat) = &table[cval] else { continue };
        for (j, &off) in lay.offsets.iter().enumerate() {
            buf[j] = amps[base + off];
        }
        for (i, &off) in lay.offsets.iter().enumerate() {
            let row = &mat[i * tsize..(i + 1) * tsize];
            let mut acc = ZERO;
            for (a, b) in row.iter().zip(&buf) {
                acc += a * b;
            }
            amps[base + off] = acc;
        }
    }
    Ok(())
}

/// Permute basis states of the target registers. `perm[j]` is the image of
/// combined target index `j`; it must be a bijection.
pub fn apply_permutation(
    amps: &mut [Complex64],
    dims: &[usize],
    targets: &[usize],
    perm: &[usize],
) -> Result<(), QError> {
    check_targets(dims, targets)?;
    let tsize: usize = targets.iter().map(|&t| dims[t]).product();
    if perm.len() != tsize {
        return Err(QError::DimensionMismatch(format!(
            "permutation of length {} over {tsize} states",
            perm.len()
        )));
    }
    let mut seen = vec![false; tsize];
    for &p in perm {
        if p >= tsize || seen[p] {
            return Err(QError::InvalidOperator("map is not a bijection".into()));
        }
        seen[p] = true;
    }
    let lay = layout(dims, targets);
    let mut buf = vec![ZERO; tsize];
    for &base in &lay.bases {
        for (j, &off) in lay.offsets.iter().enumerate() {
            buf[j] = amps[base + off];
        }
        for (j, &v) in buf.iter().enumerate() {
            amps[base + lay.offsets[perm[j]]] = v;
        }
    }
    Ok(())
}

/// Squared norm of each combined-target sector: the computational-basis
/// outcome weights of the targets.
pub fn sector_weights(amps: &[Complex64], dims: &[usize], targets: &[usize]) -> Vec<f64> {
    let lay = layout(dims, targets);
    let mut w = vec![0.0; lay.offsets.len()];
    for &base in &lay.bases {
        for (j, &off) in lay.offsets.iter().enumerate() {
            w[j] += amps[base + off].norm_sqr();
        }
    }
    w
}

/// Zero every amplitude whose combined target index differs from `keep`.
pub fn project_sector(amps: &mut [Complex64], dims: &[usize], targets: &[usize], keep: usize) {
    let lay = layout(dims, targets);
    for &base in &lay.bases {
        for (j, &off) in lay.offsets.iter().enumerate() {
            if j != keep {
                amps[base + off] = ZERO;
            }
        }
    }
}

/// Reshape amplitudes into a `kept x rest` matrix (kept registers in the
/// order given).
pub fn bipartition(amps: &[Complex64], dims: &[usize], keep: &[usize]) -> Result<Matrix, QError> {
    check_targets(dims, keep)?;
    let lay = layout(dims, keep);
    let kdim = lay.offsets.len();
    let rdim = lay.bases.len();
    let mut m = Matrix::zeros(kdim, rdim);
    for (r, &base) in lay.bases.iter().enumerate() {
        for (k, &off) in lay.offsets.iter().enumerate() {
            m[(k, r)] = amps[base + off];
        }
    }
    Ok(m)
}
