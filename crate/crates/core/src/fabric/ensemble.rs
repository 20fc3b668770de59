use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::ops::{Basis, Op, Slot};
use super::{FabricError, Owner, Register, RegisterLayout};
use crate::qcore::kernel::{self, ZERO};
use crate::qcore::{
    entropy_from_eigenvalues, hermitian_eigenvalues, DensityOperator, Matrix, QError, StateVector, EIGEN_CLAMP,
};

/// Classical outcomes seen along one branch, keyed by measurement label.
pub type Record = BTreeMap<String, usize>;

#[derive(Debug, Clone)]
pub struct Branch {
    pub probability: f64,
    pub state: StateVector,
    pub record: Record,
}

/// Weighted pure branches over a shared register layout.
#[derive(Debug, Clone)]
pub struct OutcomeEnsemble {
    layout: RegisterLayout,
    branches: Vec<Branch>,
}

/// How measurements are resolved.
pub(crate) enum Resolver {
    Enumerate,
    Sample(Box<ChaCha8Rng>),
    /// Measurements become isometries into fresh environment registers held
    /// by the measuring party; the global state stays pure.
    Coherent {
        next_env: usize,
    },
}

impl OutcomeEnsemble {
    pub fn new(layout: RegisterLayout, branches: Vec<Branch>) -> Result<Self, FabricError> {
        let dims = layout.dims();
        let mut total = 0.0;
        for b in &branches {
            if b.state.dims() != dims.as_slice() {
                return Err(
                    QError::DimensionMismatch(format!("branch over {:?}, layout {:?}", b.state.dims(), dims)).into(),
                );
            }
            if b.probability < 0.0 {
                return Err(FabricError::Definition("negative branch probability".into()));
            }
            total += b.probability;
        }
        if (total - 1.0).abs() > crate::qcore::TOL {
            return Err(FabricError::Definition(format!("branch probabilities sum to {total}")));
        }
        Ok(Self { layout, branches })
    }

    pub fn pure(layout: RegisterLayout, state: StateVector) -> Result<Self, FabricError> {
        Self::new(
            layout,
            vec![Branch {
                probability: 1.0,
                state,
                record: Record::new(),
            }],
        )
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub(crate) fn layout_mut(&mut self) -> &mut RegisterLayout {
        &mut self.layout
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Branch-averaged reduced state on `keep` (layout indices, in that order).
    pub fn density_on(&self, keep: &[usize]) -> Result<DensityOperator, FabricError> {
        let dims = self.layout.dims();
        let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let kd = kernel::checked_size(&kdims)?;
        let mut rho = Matrix::zeros(kd, kd);
        for b in &self.branches {
            let m = kernel::bipartition(b.state.amplitudes(), &dims, keep)?;
            rho += (&m * m.adjoint()) * Complex64::new(b.probability, 0.0);
        }
        Ok(DensityOperator::from_raw(kdims, rho))
    }

    /// Reduced state on named registers (in the order given).
    pub fn density_of(&self, names: &[String]) -> Result<DensityOperator, FabricError> {
        let idx = self.layout.indices(names)?;
        self.density_on(&idx)
    }

    /// Reduced state on everything owned by `owners`, in layout order.
    pub fn density_owned(&self, owners: &[Owner]) -> Result<DensityOperator, FabricError> {
        self.density_on(&self.layout.owned_by(owners))
    }

    pub fn full_density(&self) -> Result<DensityOperator, FabricError> {
        let all: Vec<usize> = (0..self.layout.len()).collect();
        self.density_on(&all)
    }

    /// Eigenvalues above the clamp of the reduced state on `keep`, descending.
    /// Uses whichever Gram matrix is smaller, so the reduced state itself is
    /// never formed when its complement is small.
    pub fn spectrum_on(&self, keep: &[usize]) -> Result<Vec<f64>, FabricError> {
        let dims = self.layout.dims();
        let blocks: Vec<Matrix> = self
            .branches
            .iter()
            .map(|b| {
                kernel::bipartition(b.state.amplitudes(), &dims, keep)
                    .map(|m| m * Complex64::new(b.probability.sqrt(), 0.0))
            })
            .collect::<Result<_, _>>()?;
        let kd = blocks.first().map_or(1, |m| m.nrows());
        let cols: usize = blocks.iter().map(|m| m.ncols()).sum();
        let gram = if kd <= cols {
            let mut g = Matrix::zeros(kd, kd);
            for m in &blocks {
                g += m * m.adjoint();
            }
            g
        } else {
            let mut g = Matrix::zeros(cols, cols);
            let mut ro = 0;
            for a in &blocks {
                let mut co = 0;
                for b in &blocks {
                    let blk = a.adjoint() * b;
                    g.view_mut((ro, co), (a.ncols(), b.ncols())).copy_from(&blk);
                    co += b.ncols();
                }
                ro += a.ncols();
            }
            g
        };
        let mut eig: Vec<f64> = hermitian_eigenvalues(&gram)
            .into_iter()
            .filter(|&l| l > EIGEN_CLAMP)
            .collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        Ok(eig)
    }

    /// Von Neumann entropy (bits) of the reduced state on `keep`.
    pub fn entropy_on(&self, keep: &[usize]) -> Result<f64, FabricError> {
        if keep.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_from_eigenvalues(&self.spectrum_on(keep)?))
    }

    pub fn entropy_of(&self, names: &[String]) -> Result<f64, FabricError> {
        let idx = self.layout.indices(names)?;
        self.entropy_on(&idx)
    }

    /// Trace distance between the two global states. Works in the span of
    /// the branch vectors: with W = [√p ψ…, √q φ…] and S = diag(1…, −1…),
    /// ρ − σ = W S W† has the nonzero spectrum of G^½ S G^½, G = W†W.
    pub fn trace_distance_to(&self, other: &OutcomeEnsemble) -> Result<f64, FabricError> {
        let dims = self.layout.dims();
        if dims != other.layout.dims() {
            return Err(QError::DimensionMismatch(format!("{:?} vs {:?}", dims, other.layout.dims())).into());
        }
        let n = kernel::checked_size(&dims)?;
        let m = self.branches.len() + other.branches.len();
        if n <= m {
            let d = crate::qcore::trace_distance(&self.full_density()?, &other.full_density()?)?;
            return Ok(d);
        }
        let weighted: Vec<(f64, &StateVector)> = self
            .branches
            .iter()
            .map(|b| (b.probability, &b.state))
            .chain(other.branches.iter().map(|b| (b.probability, &b.state)))
            .collect();
        let mut g = Matrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let (pi, a) = weighted[i];
                let (pj, b) = weighted[j];
                let v = a.inner(b)? * (pi * pj).sqrt();
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        let eig = nalgebra::SymmetricEigen::new(g);
        // Null directions of the Gram matrix would otherwise contribute sqrt(eps) noise.
        let cut = 1e-12 * eig.eigenvalues.max().max(0.0);
        let root = Matrix::from_diagonal(
            &eig.eigenvalues
                .map(|l| Complex64::new(if l > cut { l.sqrt() } else { 0.0 }, 0.0)),
        );
        let half = &eig.eigenvectors * root * eig.eigenvectors.adjoint();
        let sign = Matrix::from_fn(m, m, |i, j| match (i == j, i < self.branches.len()) {
            (false, _) => ZERO,
            (true, true) => Complex64::new(1.0, 0.0),
            (true, false) => Complex64::new(-1.0, 0.0),
        });
        let h = &half * sign * &half;
        Ok(0.5 * hermitian_eigenvalues(&h).iter().map(|l| l.abs()).sum::<f64>())
    }

    /// Apply operations on behalf of `party`, enumerating measurement branches.
    pub fn apply_ops(&mut self, ops: &[Op], party: Owner) -> Result<(), FabricError> {
        let mut r = Resolver::Enumerate;
        for op in ops {
            self.apply(op, party, &mut r)?;
        }
        Ok(())
    }

    fn resolve(&self, slots: &[Slot]) -> Result<(Vec<usize>, Vec<usize>), FabricError> {
        let mut flat = Vec::new();
        let mut sdims = Vec::with_capacity(slots.len());
        for s in slots {
            let mut d = 1;
            for n in s.registers() {
                let i = self
                    .layout
                    .index_of(n)
                    .ok_or_else(|| FabricError::UnknownRegister(n.clone()))?;
                d *= self.layout.registers()[i].dim;
                flat.push(i);
            }
            sdims.push(d);
        }
        Ok((flat, sdims))
    }

    pub(crate) fn apply(&mut self, op: &Op, party: Owner, resolver: &mut Resolver) -> Result<(), FabricError> {
        self.layout.check_owned(party, &op.registers())?;
        let dims = self.layout.dims();
        match op {
            Op::Unitary { targets, matrix } => {
                let (flat, _) = self.resolve(targets)?;
                for b in &mut self.branches {
                    kernel::apply_matrix(b.state.amplitudes_mut(), &dims, &flat, matrix)?;
                }
            }
            Op::Permute { targets, map } => {
                let (flat, sdims) = self.resolve(targets)?;
                let perm = permutation_table(&sdims, map.as_ref())?;
                for b in &mut self.branches {
                    kernel::apply_permutation(b.state.amplitudes_mut(), &dims, &flat, &perm)?;
                }
            }
            Op::Controlled {
                controls,
                targets,
                select,
            } => {
                let (cflat, cdims) = self.resolve(controls)?;
                let (tflat, _) = self.resolve(targets)?;
                let sel = |c: usize| select(&kernel::digits_of(c, &cdims));
                for b in &mut self.branches {
                    kernel::apply_controlled(b.state.amplitudes_mut(), &dims, &cflat, &tflat, &sel)?;
                }
            }
            Op::Measure { targets, basis, label } => {
                let (flat, _) = self.resolve(targets)?;
                match resolver {
                    Resolver::Coherent { next_env } => {
                        let env = format!("env{}:{}", *next_env, label);
                        *next_env += 1;
                        self.measure_coherent(&flat, basis, env, party)?;
                    }
                    Resolver::Enumerate => self.measure_branching(&flat, basis, label, None)?,
                    Resolver::Sample(rng) => self.measure_branching(&flat, basis, label, Some(rng))?,
                }
            }
        }
        Ok(())
    }

    fn measure_branching(
        &mut self,
        flat: &[usize],
        basis: &Basis,
        label: &str,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(), FabricError> {
        let dims = self.layout.dims();
        let tdim: usize = flat.iter().map(|&i| dims[i]).product();
        let mut out = Vec::new();
        for b in &self.branches {
            // candidate post-measurement (unnormalized) states by outcome
            let mut cands: Vec<(usize, f64, Vec<Complex64>)> = Vec::new();
            match basis {
                Basis::Computational => {
                    let w = kernel::sector_weights(b.state.amplitudes(), &dims, flat);
                    for (j, &wj) in w.iter().enumerate() {
                        if wj * b.probability > EIGEN_CLAMP {
                            let mut amps = b.state.amplitudes().to_vec();
                            kernel::project_sector(&mut amps, &dims, flat, j);
                            cands.push((j, wj, amps));
                        }
                    }
                }
                Basis::Projective(m) => {
                    let mdim: usize = m.dims().iter().product();
                    if mdim != tdim {
                        return Err(QError::DimensionMismatch(format!(
                            "measurement over {mdim} states on targets spanning {tdim}"
                        ))
                        .into());
                    }
                    for (j, o) in m.outcomes().iter().enumerate() {
                        let mut amps = b.state.amplitudes().to_vec();
                        kernel::apply_matrix(&mut amps, &dims, flat, &o.projector)?;
                        let wj: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                        if wj * b.probability > EIGEN_CLAMP {
                            cands.push((j, wj, amps));
                        }
                    }
                }
            }
            if let Some(rng) = rng.as_deref_mut() {
                let total: f64 = cands.iter().map(|c| c.1).sum();
                let u: f64 = rng.random::<f64>() * total;
                let mut acc = 0.0;
                let mut pick = cands.len() - 1;
                for (i, c) in cands.iter().enumerate() {
                    acc += c.1;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                let (j, _, amps) = cands.swap_remove(pick);
                cands = vec![(j, 1.0, amps)];
            }
            for (j, wj, amps) in cands {
                let (state, _) = StateVector::normalized(dims.clone(), amps)?;
                let mut record = b.record.clone();
                record.insert(label.to_string(), j);
                out.push(Branch {
                    probability: b.probability * wj,
                    state,
                    record,
                });
            }
        }
        let total: f64 = out.iter().map(|b| b.probability).sum();
        out.retain(|b| b.probability / total >= EIGEN_CLAMP);
        let total: f64 = out.iter().map(|b| b.probability).sum();
        for b in &mut out {
            b.probability /= total;
        }
        self.branches = out;
        Ok(())
    }

    fn measure_coherent(
        &mut self,
        flat: &[usize],
        basis: &Basis,
        env: String,
        party: Owner,
    ) -> Result<(), FabricError> {
        let dims = self.layout.dims();
        let tdim: usize = flat.iter().map(|&i| dims[i]).product();
        let (change, tags, n_out) = match basis {
            Basis::Computational => (None, (0..tdim).collect::<Vec<_>>(), tdim),
            Basis::Projective(m) => {
                let (b, tags) = m.adapted_basis();
                if b.nrows() != tdim {
                    return Err(QError::DimensionMismatch(format!(
                        "measurement over {} states on targets spanning {tdim}",
                        b.nrows()
                    ))
                    .into());
                }
                (Some(b), tags, m.len())
            }
        };
        let env_idx = self.layout.push(Register::new(env, n_out, party))?;
        let mut new_dims = dims.clone();
        new_dims.push(n_out);
        kernel::checked_size(&new_dims)?;
        let mut targets = flat.to_vec();
        targets.push(env_idx);
        // env ← env + tag(target value) mod n_out
        let perm: Vec<usize> = (0..tdim * n_out)
            .map(|j| {
                let (t, e) = (j / n_out, j % n_out);
                t * n_out + (e + tags[t]) % n_out
            })
            .collect();
        for b in &mut self.branches {
            let mut amps = Vec::with_capacity(b.state.dim() * n_out);
            for &a in b.state.amplitudes() {
                amps.push(a);
                amps.extend(std::iter::repeat_n(ZERO, n_out - 1));
            }
            if let Some(basis) = &change {
                kernel::apply_matrix(&mut amps, &new_dims, flat, &basis.adjoint())?;
            }
            kernel::apply_permutation(&mut amps, &new_dims, &targets, &perm)?;
            if let Some(basis) = &change {
                kernel::apply_matrix(&mut amps, &new_dims, flat, basis)?;
            }
            b.state = StateVector::from_raw(new_dims.clone(), amps);
        }
        Ok(())
    }
}

fn permutation_table(
    sdims: &[usize],
    map: &(dyn Fn(&[usize]) -> Vec<usize> + Send + Sync),
) -> Result<Vec<usize>, FabricError> {
    let n: usize = sdims.iter().product();
    (0..n)
        .map(|j| {
            let image = map(&kernel::digits_of(j, sdims));
            if image.len() != sdims.len() || image.iter().zip(sdims).any(|(&v, &d)| v >= d) {
                return Err(FabricError::Definition(format!(
                    "basis map sends {:?} outside slot dims {sdims:?}",
                    kernel::digits_of(j, sdims)
                )));
            }
            Ok(kernel::index_of(&image, sdims))
        })
        .collect()
}
