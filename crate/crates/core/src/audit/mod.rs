//! Entropy-chain audit of the communication lower bound on executed runs.
//!
//! The chain is evaluated on a coherent run (measurements kept as
//! environment registers, so the global state stays pure) with every message
//! maximally entangled with a reference. Each inequality or equality of the
//! chain becomes a [`ChainStep`] with its numeric slack. The audit checks
//! instances; when a step fails it reports which hypothesis of the bound the
//! protocol violates.
//!
//! Cut points: H(Q^(i)) and H(T^(i)) are taken right after the i-th query is
//! sent, H(A^(i)) right after the i-th answer arrives, and T^(0) is the
//! user's side of the initial state.

mod charpoly;
mod separation;

pub use charpoly::{charpoly_eigenvalues, cross_check_entropy, EntropyCrossCheck, CHARPOLY_MAX_DIM};
pub use separation::{crossover, separation_table, SeparationRow};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fabric::{
    run_coherent, Direction, FabricError, MessageInput, Mode, OutcomeEnsemble, Owner, ProtocolSpec, RunOutcome,
    Transcript,
};
use crate::qcore::{entropy_from_eigenvalues, hermitian_eigenvalues, kernel, max_entangled, Complex64};

/// Tolerance for chain steps; nested partial traces lose a few digits.
pub const AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuditError {
    #[error(transparent)]
    Fabric(#[from] FabricError),
    #[error("audit needs every message purified by a reference register")]
    MissingReferences,
    #[error("audit needs a coherent (single pure branch) run")]
    NotCoherent,
    #[error("round {0} has no snapshot")]
    MissingSnapshot(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub label: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs − rhs for ≥, −|lhs − rhs| for =.
    pub slack: f64,
}

impl ChainStep {
    fn new(label: impl Into<String>, relation: Relation, lhs: f64, rhs: f64) -> Self {
        let slack = match relation {
            Relation::Ge => lhs - rhs,
            Relation::Eq => -(lhs - rhs).abs(),
        };
        Self {
            label: label.into(),
            relation,
            lhs,
            rhs,
            slack,
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundEntropies {
    pub i: usize,
    pub h_a: f64,
    pub h_q: f64,
    pub h_t: f64,
}

/// Lemma 4 ingredients on the final state of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub k: usize,
    /// Tr ρ² of the final state on (output, R_k).
    pub output_reference_purity: f64,
    pub output_reference_pure: bool,
    pub h_rs: f64,
    pub h_s: f64,
    pub sum_h_r: f64,
    /// |H(R S) − H(S) − Σ H(R_ℓ)|
    pub independence_gap: f64,
    pub independent: bool,
    pub lemma4_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyChainReport {
    pub protocol: String,
    pub dims: Vec<usize>,
    pub k: usize,
    pub rounds: Vec<RoundEntropies>,
    pub lemma3: Vec<ChainStep>,
    pub steps: Vec<ChainStep>,
    pub h_rs: f64,
    pub sum_h_r: f64,
    pub cc: f64,
    pub bound: f64,
    pub prior_ebits: f64,
    pub reference: ReferenceReport,
    pub holds: bool,
    pub break_point: Option<String>,
    pub diagnosis: String,
    pub tolerance: f64,
}

/// Maximally entangled purification for every message.
pub fn audit_inputs(dims: &[usize]) -> Result<Vec<MessageInput>, FabricError> {
    dims.iter()
        .map(|&d| Ok(MessageInput::Purified(max_entangled(d)?)))
        .collect()
}

/// Coherent run on maximally entangled inputs, ready for the audit.
pub fn audit_run(spec: &ProtocolSpec, k: usize) -> Result<RunOutcome, FabricError> {
    run_coherent(spec, &audit_inputs(&spec.message_dims)?, k)
}

fn entropy(ens: &OutcomeEnsemble, names: &[String]) -> Result<f64, FabricError> {
    if names.is_empty() {
        return Ok(0.0);
    }
    ens.entropy_of(names)
}

fn user_names_except(ens: &OutcomeEnsemble, except: &[String]) -> Vec<String> {
    ens.layout()
        .names_owned_by(Owner::User)
        .into_iter()
        .filter(|n| !except.contains(n))
        .collect()
}

fn snapshot(t: &Transcript, i: usize, dir: Direction) -> Result<&crate::fabric::TransferEvent, AuditError> {
    t.event(i, dir).map_err(|_| AuditError::MissingSnapshot(i))
}

/// H(A^(i)) for i ≥ 1 (0 for i = 0).
fn h_answer(t: &Transcript, i: usize) -> Result<f64, AuditError> {
    if i == 0 {
        return Ok(0.0);
    }
    let e = snapshot(t, i, Direction::Answer)?;
    Ok(entropy(&e.snapshot, &e.moved)?)
}

fn h_query(t: &Transcript, i: usize) -> Result<f64, AuditError> {
    let e = snapshot(t, i, Direction::Query)?;
    Ok(entropy(&e.snapshot, &e.moved)?)
}

/// H(T^(i)): the user's registers other than the message just sent; T^(0)
/// is the user's side of the initial state.
fn h_local(t: &Transcript, i: usize) -> Result<f64, AuditError> {
    if i == 0 {
        let names = user_names_except(&t.initial, &[]);
        return Ok(entropy(&t.initial, &names)?);
    }
    let e = snapshot(t, i, Direction::Query)?;
    let names = user_names_except(&e.snapshot, &[]);
    Ok(entropy(&e.snapshot, &names)?)
}

/// Lemma 3 for round i (0 ≤ i < r):
/// H(A^(i)) + H(Q^(i+1)) ≥ H(T^(i+1)) − H(T^(i)).
pub fn audit_round(transcript: &Transcript, i: usize) -> Result<ChainStep, AuditError> {
    let r = transcript.rounds();
    if i >= r {
        return Err(FabricError::RoundOutOfRange { round: i, rounds: r }.into());
    }
    let lhs = h_answer(transcript, i)? + h_query(transcript, i + 1)?;
    let rhs = h_local(transcript, i + 1)? - h_local(transcript, i)?;
    Ok(ChainStep::new(format!("lemma3[i={i}]"), Relation::Ge, lhs, rhs))
}

fn require_coherent(outcome: &RunOutcome) -> Result<(), AuditError> {
    if outcome.references.is_empty() || outcome.references.len() != outcome.transcript.message_dims.len() {
        return Err(AuditError::MissingReferences);
    }
    if outcome.mode != Mode::Coherent || outcome.final_state.branches().len() != 1 {
        return Err(AuditError::NotCoherent);
    }
    Ok(())
}

/// Entropy of `quantum` together with `records` after dephasing the
/// records: the honest server holds its measurement outcomes as classical
/// data. The dephased state is block diagonal in the record value, so its
/// spectrum is the union of the blocks' spectra.
fn dephased_entropy(ens: &OutcomeEnsemble, quantum: &[String], records: &[String]) -> Result<f64, FabricError> {
    let mut names = records.to_vec();
    names.extend(quantum.iter().cloned());
    let keep = ens.layout().indices(&names)?;
    let dims = ens.layout().dims();
    let qdim: usize = quantum
        .iter()
        .map(|n| ens.layout().get(n).map(|r| r.dim))
        .product::<Result<_, _>>()?;
    let mut eig = Vec::new();
    for b in ens.branches() {
        let m = kernel::bipartition(b.state.amplitudes(), &dims, &keep)? * Complex64::new(b.probability.sqrt(), 0.0);
        for c in 0..m.nrows() / qdim {
            let block = m.rows(c * qdim, qdim);
            let g = if qdim <= block.ncols() {
                block * block.adjoint()
            } else {
                block.adjoint() * block
            };
            eig.extend(hermitian_eigenvalues(&g));
        }
    }
    Ok(entropy_from_eigenvalues(&eig))
}

/// Lemma 4 checks on the final state: (i) (output, R_k) is pure;
/// (ii) H(R S) = H(S) + Σ H(R_ℓ); (iii) H(R S) ≥ Σ H(R_ℓ).
/// (ii) and (iii) read the server with its measurement records dephased.
pub fn audit_reference_independence(outcome: &RunOutcome) -> Result<ReferenceReport, AuditError> {
    require_coherent(outcome)?;
    let k = outcome.transcript.k;
    let joint = outcome.output_with_reference(k)?;
    let purity = joint.purity();
    let ens = &outcome.final_state;
    let (records, quantum): (Vec<String>, Vec<String>) = ens
        .layout()
        .names_owned_by(Owner::Server)
        .into_iter()
        .partition(|n| n.starts_with("env"));
    let mut rs = outcome.references.clone();
    rs.extend(quantum.iter().cloned());
    let h_rs = dephased_entropy(ens, &rs, &records)?;
    let h_s = dephased_entropy(ens, &quantum, &records)?;
    let mut sum_h_r = 0.0;
    for r in &outcome.references {
        sum_h_r += entropy(ens, std::slice::from_ref(r))?;
    }
    let gap = (h_rs - h_s - sum_h_r).abs();
    Ok(ReferenceReport {
        k,
        output_reference_purity: purity,
        output_reference_pure: purity >= 1.0 - AUDIT_TOL,
        h_rs,
        h_s,
        sum_h_r,
        independence_gap: gap,
        independent: gap <= AUDIT_TOL,
        lemma4_holds: h_rs >= sum_h_r - AUDIT_TOL,
    })
}

/// Evaluate every step of the chain
/// CC ≥ Σ_i (H(A^(i)) + H(Q^(i))) = … ≥ H(R_[f] S^(r)) ≥ Σ H(R_ℓ) = Σ log|X_ℓ|.
pub fn audit_cc_bound(outcome: &RunOutcome, prior_ebits: f64) -> Result<EntropyChainReport, AuditError> {
    require_coherent(outcome)?;
    let t = &outcome.transcript;
    let r = t.rounds();
    if r == 0 {
        return Err(AuditError::MissingSnapshot(1));
    }

    let mut rounds = vec![RoundEntropies {
        i: 0,
        h_a: 0.0,
        h_q: 0.0,
        h_t: h_local(t, 0)?,
    }];
    for i in 1..=r {
        rounds.push(RoundEntropies {
            i,
            h_a: h_answer(t, i)?,
            h_q: h_query(t, i)?,
            h_t: h_local(t, i)?,
        });
    }
    let lemma3 = (0..r).map(|i| audit_round(t, i)).collect::<Result<Vec<_>, _>>()?;

    let last = snapshot(t, r, Direction::Answer)?;
    let user_all = last.snapshot.layout().names_owned_by(Owner::User);
    let h_at = entropy(&last.snapshot, &user_all)?;
    let t_r: Vec<String> = user_names_except(&last.snapshot, &last.moved);
    let h_tr = entropy(&last.snapshot, &t_r)?;
    let mut rs = outcome.references.clone();
    rs.extend(last.snapshot.layout().names_owned_by(Owner::Server));
    let h_rs = entropy(&last.snapshot, &rs)?;

    let reference = audit_reference_independence(outcome)?;
    let sum_h_r = reference.sum_h_r;
    let bound: f64 = t.message_dims.iter().map(|&d| (d as f64).log2()).sum();
    let cc = t.complexity.total;

    let h_a = |i: usize| rounds[i].h_a;
    let h_q = |i: usize| rounds[i].h_q;
    let s1: f64 = (1..=r).map(|i| h_a(i) + h_q(i)).sum();
    let s2 = h_a(r) + h_q(1) + (1..r).map(|i| h_a(i) + h_q(i + 1)).sum::<f64>();
    let s3 = h_a(r) + h_q(1) + h_tr - rounds[1].h_t;
    let s4 = h_a(r) + h_tr;

    let steps = vec![
        ChainStep::new("capacity", Relation::Ge, cc, s1),
        ChainStep::new("reindex", Relation::Eq, s1, s2),
        ChainStep::new("lemma3-sum", Relation::Ge, s2, s3),
        ChainStep::new("initial-purity", Relation::Eq, s3, s4),
        ChainStep::new("subadditivity", Relation::Ge, s4, h_at),
        ChainStep::new("global-purity", Relation::Eq, h_at, h_rs),
        ChainStep::new("lemma4", Relation::Ge, h_rs, sum_h_r),
        ChainStep::new("max-entangled", Relation::Eq, sum_h_r, bound),
    ];
    let failing = lemma3.iter().chain(&steps).find(|s| !s.holds(AUDIT_TOL));
    let holds = failing.is_none();
    let break_point = failing.map(|s| s.label.clone());
    let diagnosis = match break_point.as_deref() {
        None => "chain holds".to_string(),
        Some("initial-purity") if prior_ebits > 0.0 => format!(
            "hypothesis violated: {prior_ebits} ebits of prior entanglement leave Q^(1)T^(1) mixed, \
             H(Q^(1)) − H(T^(1)) = {:.6}",
            h_q(1) - rounds[1].h_t
        ),
        Some(_) if !reference.output_reference_pure => format!(
            "hypothesis violated: not correct on quantum messages (Tr ρ² of output and R_k = {:.6})",
            reference.output_reference_purity
        ),
        Some(step) => format!("step `{step}` fails"),
    };

    Ok(EntropyChainReport {
        protocol: t.protocol.clone(),
        dims: t.message_dims.clone(),
        k: t.k,
        rounds,
        lemma3,
        steps,
        h_rs,
        sum_h_r,
        cc,
        bound,
        prior_ebits,
        reference,
        holds,
        break_point,
        diagnosis,
        tolerance: AUDIT_TOL,
    })
}

/// Audit of `spec` at target `k` on a fresh coherent run.
pub fn audit_protocol(spec: &ProtocolSpec, k: usize) -> Result<EntropyChainReport, AuditError> {
    let out = audit_run(spec, k)?;
    let pe = spec.structural_complexity()?.prior_ebits;
    audit_cc_bound(&out, pe)
}
