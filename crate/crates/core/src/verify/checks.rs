use serde::{Deserialize, Serialize};

use super::inputs::{message_json, test_tuples, TestTuple};
use super::{Budget, CorrectnessVerdict, CorrectnessWitness, Criterion, SecrecyVerdict, SecrecyWitness};
use crate::fabric::{
    final_server_and_reference_view, run, server_view, Direction, FabricError, InputSet, MessageInput, Owner,
    ProtocolSpec, RunOutcome,
};
use crate::protocols::AttackSpec;
use crate::qcore::{trace_distance, DensityOperator, StateVector};

fn witness_messages(t: &TestTuple) -> Vec<serde_json::Value> {
    t.messages.iter().map(message_json).collect()
}

/// ⟨ψ|ρ|ψ⟩, or 0 when the dimensions disagree.
fn overlap(rho: &DensityOperator, psi: &StateVector) -> f64 {
    if rho.dim() != psi.dim() {
        return 0.0;
    }
    let v = psi.to_column();
    (v.adjoint() * rho.matrix() * &v)[(0, 0)].re
}

fn output_fidelity(out: &RunOutcome, msg: &MessageInput, k: usize) -> Result<f64, FabricError> {
    match msg {
        MessageInput::Basis(x) => {
            let rho = out.output_density()?;
            Ok(if *x < rho.dim() { rho.matrix()[(*x, *x)].re } else { 0.0 })
        }
        MessageInput::Pure(psi) => Ok(overlap(&out.output_density()?, psi)),
        MessageInput::Purified(psi) => Ok(overlap(&out.output_with_reference(k)?, psi)),
    }
}

/// Output fidelity with the k-th input over the test family; for purified
/// inputs the joint output-reference state is compared with the purification.
pub fn check_correctness(
    spec: &ProtocolSpec,
    input_set: InputSet,
    budget: &Budget,
) -> Result<CorrectnessVerdict, FabricError> {
    let (tuples, coverage) = test_tuples(&spec.message_dims, input_set, budget)?;
    let mut min_fidelity = f64::INFINITY;
    let mut worst = None;
    let mut instances = 0;
    for t in &tuples {
        for k in 1..=spec.f() {
            let out = run(spec, &t.messages, k)?;
            let fid = output_fidelity(&out, &t.messages[k - 1], k)?;
            instances += 1;
            if fid < min_fidelity {
                min_fidelity = fid;
                worst = Some(CorrectnessWitness {
                    k,
                    tuple: t.label.clone(),
                    messages: witness_messages(t),
                    fidelity: fid,
                });
            }
        }
    }
    Ok(CorrectnessVerdict {
        protocol: spec.name.clone(),
        input_set,
        min_fidelity,
        worst,
        pass: min_fidelity >= 1.0 - budget.tolerance,
        tolerance: budget.tolerance,
        instances,
        coverage,
    })
}

struct Worst {
    distance: f64,
    witness: Option<SecrecyWitness>,
}

impl Worst {
    fn new() -> Self {
        Self {
            distance: 0.0,
            witness: None,
        }
    }

    fn offer(&mut self, distance: f64, k: usize, k_prime: usize, round: Option<usize>, t: &TestTuple) {
        if self.witness.is_none() || distance > self.distance {
            self.distance = distance;
            self.witness = Some(SecrecyWitness {
                k,
                k_prime,
                round,
                tuple: t.label.clone(),
                messages: witness_messages(t),
                distance,
            });
        }
    }

    fn pairwise(&mut self, views: &[DensityOperator], round: Option<usize>, t: &TestTuple) -> Result<(), FabricError> {
        for a in 0..views.len() {
            for b in a + 1..views.len() {
                let d = trace_distance(&views[a], &views[b])?;
                self.offer(d, a + 1, b + 1, round, t);
            }
        }
        Ok(())
    }

    fn verdict(
        self,
        spec: &ProtocolSpec,
        criterion: Criterion,
        input_set: InputSet,
        budget: &Budget,
        tuples: usize,
        coverage: String,
    ) -> SecrecyVerdict {
        SecrecyVerdict {
            protocol: spec.name.clone(),
            criterion,
            input_set,
            max_distance: self.distance,
            witness: self.witness,
            pass: self.distance <= budget.tolerance,
            tolerance: budget.tolerance,
            tuples,
            coverage,
        }
    }
}

fn runs_for_all_k(spec: &ProtocolSpec, t: &TestTuple) -> Result<Vec<RunOutcome>, FabricError> {
    (1..=spec.f()).map(|k| run(spec, &t.messages, k)).collect()
}

/// Final-state criterion: the server's final state together with the
/// message references must not depend on k.
pub fn check_final_state_secrecy(
    spec: &ProtocolSpec,
    input_set: InputSet,
    budget: &Budget,
) -> Result<SecrecyVerdict, FabricError> {
    let (tuples, coverage) = test_tuples(&spec.message_dims, input_set, budget)?;
    let mut worst = Worst::new();
    for t in &tuples {
        let views = runs_for_all_k(spec, t)?
            .iter()
            .map(final_server_and_reference_view)
            .collect::<Result<Vec<_>, _>>()?;
        worst.pairwise(&views, None, t)?;
    }
    Ok(worst.verdict(spec, Criterion::FinalState, input_set, budget, tuples.len(), coverage))
}

/// All-round criterion: the server's state on receipt of every query must
/// not depend on k.
pub fn check_all_round_secrecy(
    spec: &ProtocolSpec,
    input_set: InputSet,
    budget: &Budget,
) -> Result<SecrecyVerdict, FabricError> {
    let (tuples, coverage) = test_tuples(&spec.message_dims, input_set, budget)?;
    let mut worst = Worst::new();
    for t in &tuples {
        let runs = runs_for_all_k(spec, t)?;
        for j in 1..=spec.round_count() {
            let views = runs
                .iter()
                .map(|o| server_view(&o.transcript, j))
                .collect::<Result<Vec<_>, _>>()?;
            worst.pairwise(&views, Some(j), t)?;
        }
    }
    Ok(worst.verdict(spec, Criterion::AllRound, input_set, budget, tuples.len(), coverage))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciousReport {
    pub attack: String,
    /// Largest trace distance between the recovered attacked state and the
    /// honest state, over rounds, targets and tuples.
    pub undetectability: SecrecyVerdict,
    /// Largest I(K; guess) in bits over the tuples, K uniform.
    pub leakage_bits: f64,
    pub leakage_cap_bits: f64,
    pub leakage_tuple: Option<String>,
}

/// I(X;Y) in bits from an unnormalized joint table.
pub fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let total: f64 = joint.iter().flatten().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum::<f64>() / total).collect();
    let ncols = joint.iter().map(Vec::len).max().unwrap_or(0);
    let cols: Vec<f64> = (0..ncols)
        .map(|c| joint.iter().map(|r| r.get(c).copied().unwrap_or(0.0)).sum::<f64>() / total)
        .collect();
    let mut mi = 0.0;
    for (i, r) in joint.iter().enumerate() {
        for (j, &p) in r.iter().enumerate() {
            let p = p / total;
            if p > 0.0 {
                mi += p * (p / (rows[i] * cols[j])).log2();
            }
        }
    }
    mi.max(0.0)
}

/// Specious-server check for a declared attack: (i) after the declared
/// recovery the attacked global state must equal the honest one at every
/// round; (ii) the information the attack extracts about K.
pub fn check_specious(
    spec: &ProtocolSpec,
    attack: &AttackSpec,
    input_set: InputSet,
    budget: &Budget,
) -> Result<SpeciousReport, FabricError> {
    let attacked = attack.apply(spec)?;
    let (tuples, coverage) = test_tuples(&spec.message_dims, input_set, budget)?;
    let f = spec.f();
    let mut worst = Worst::new();
    let mut leakage = 0.0;
    let mut leakage_tuple = None;
    for t in &tuples {
        let mut joint = vec![vec![0.0; f]; f];
        for k in 1..=f {
            let honest = run(spec, &t.messages, k)?;
            let att = run(&attacked, &t.messages, k)?;
            for j in 1..=spec.round_count() {
                let h = &honest.transcript.event(j, Direction::Answer)?.snapshot;
                let mut recovered = att.transcript.event(j, Direction::Answer)?.snapshot.clone();
                recovered.apply_ops(&attack.recovery[j - 1], Owner::Server)?;
                if recovered.layout().dims() != h.layout().dims() {
                    return Err(FabricError::Definition(format!(
                        "recovery for round {j} leaves dims {:?}, honest state has {:?}",
                        recovered.layout().dims(),
                        h.layout().dims()
                    )));
                }
                worst.offer(recovered.trace_distance_to(h)?, k, k, Some(j), t);
            }
            for b in att.final_state.branches() {
                let g = (attack.extraction)(&b.record);
                if (1..=f).contains(&g) {
                    joint[k - 1][g - 1] += b.probability;
                }
            }
        }
        let mi = mutual_information(&joint);
        if leakage_tuple.is_none() || mi > leakage {
            leakage = mi;
            leakage_tuple = Some(t.label.clone());
        }
    }
    Ok(SpeciousReport {
        attack: attack.name.clone(),
        undetectability: worst.verdict(
            spec,
            Criterion::SpeciousUndetectability,
            input_set,
            budget,
            tuples.len(),
            coverage,
        ),
        leakage_bits: leakage,
        leakage_cap_bits: (f as f64).log2(),
        leakage_tuple,
    })
}
