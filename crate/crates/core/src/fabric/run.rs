use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ensemble::{Branch, OutcomeEnsemble, Record, Resolver};
use super::spec::{qubits, Complexity, ProtocolSpec};
use super::{FabricError, Owner, Register};
use crate::qcore::kernel::{self, ONE, ZERO};
use crate::qcore::{max_entangled, DensityOperator, StateVector};

/// One message as supplied to a run.
#[derive(Debug, Clone, PartialEq)]
pub enum MessageInput {
    /// Computational basis state |x⟩.
    Basis(usize),
    /// Pure state on the message register.
    Pure(StateVector),
    /// Purification over (message, reference); the reference register is
    /// attached to the run and owned by neither party.
    Purified(StateVector),
}

impl MessageInput {
    pub fn has_reference(&self) -> bool {
        matches!(self, MessageInput::Purified(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Exhaustive branch enumeration.
    Enumerate,
    /// One branch per measurement, drawn from a seeded generator.
    Sample(u64),
    /// Measurements dilated into environment registers; one pure branch.
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    Query,
    Answer,
}

/// A register transfer and the global ensemble right after it.
#[derive(Debug, Clone)]
pub struct TransferEvent {
    pub round: usize,
    pub direction: Direction,
    pub moved: Vec<String>,
    pub qubits: f64,
    pub snapshot: OutcomeEnsemble,
}

#[derive(Debug, Clone)]
pub struct Transcript {
    pub protocol: String,
    pub message_dims: Vec<usize>,
    pub k: usize,
    /// State before any party acts (prior entanglement and messages loaded).
    pub initial: OutcomeEnsemble,
    pub events: Vec<TransferEvent>,
    pub complexity: Complexity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundJson {
    pub j: usize,
    pub direction: Direction,
    pub moved: Vec<String>,
    pub qubits: f64,
    pub server_view_eigenvalues: Vec<f64>,
}

/// Export schema for transcripts; field order is fixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptJson {
    pub protocol: String,
    pub f: usize,
    pub dims: Vec<usize>,
    pub k: usize,
    pub rounds: Vec<RoundJson>,
    #[serde(rename = "UC")]
    pub uc: f64,
    #[serde(rename = "DC")]
    pub dc: f64,
    #[serde(rename = "CC")]
    pub cc: f64,
    #[serde(rename = "PE_ebits")]
    pub pe_ebits: f64,
}

impl Transcript {
    pub fn rounds(&self) -> usize {
        self.events.iter().map(|e| e.round).max().unwrap_or(0)
    }

    pub fn event(&self, round: usize, direction: Direction) -> Result<&TransferEvent, FabricError> {
        self.events
            .iter()
            .find(|e| e.round == round && e.direction == direction)
            .ok_or(FabricError::RoundOutOfRange {
                round,
                rounds: self.rounds(),
            })
    }

    pub fn to_json(&self) -> Result<TranscriptJson, FabricError> {
        let rounds = self
            .events
            .iter()
            .map(|e| {
                let server = e.snapshot.layout().owned_by(&[Owner::Server]);
                Ok(RoundJson {
                    j: e.round,
                    direction: e.direction,
                    moved: e.moved.clone(),
                    qubits: e.qubits,
                    server_view_eigenvalues: e.snapshot.spectrum_on(&server)?,
                })
            })
            .collect::<Result<_, FabricError>>()?;
        Ok(TranscriptJson {
            protocol: self.protocol.clone(),
            f: self.message_dims.len(),
            dims: self.message_dims.clone(),
            k: self.k,
            rounds,
            uc: self.complexity.upload,
            dc: self.complexity.download,
            cc: self.complexity.total,
            pe_ebits: self.complexity.prior_ebits,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_state: OutcomeEnsemble,
    pub output: Vec<String>,
    pub references: Vec<String>,
    pub transcript: Transcript,
    pub mode: Mode,
}

impl RunOutcome {
    /// Branch-averaged state of the output register(s).
    pub fn output_density(&self) -> Result<DensityOperator, FabricError> {
        self.final_state.density_of(&self.output)
    }

    /// Joint state of the output and the reference of message `k` (1-based),
    /// output first.
    pub fn output_with_reference(&self, k: usize) -> Result<DensityOperator, FabricError> {
        let r = self
            .references
            .get(k - 1)
            .ok_or_else(|| FabricError::Message(format!("message {k} has no reference")))?;
        let mut names = self.output.clone();
        names.push(r.clone());
        self.final_state.density_of(&names)
    }
}

/// Exhaustive run.
pub fn run(spec: &ProtocolSpec, messages: &[MessageInput], k: usize) -> Result<RunOutcome, FabricError> {
    run_with_mode(spec, messages, k, Mode::Enumerate)
}

/// Single sampled branch, deterministic in `seed`.
pub fn run_sampled(
    spec: &ProtocolSpec,
    messages: &[MessageInput],
    k: usize,
    seed: u64,
) -> Result<RunOutcome, FabricError> {
    run_with_mode(spec, messages, k, Mode::Sample(seed))
}

/// Purified run: every measurement is kept coherent in an environment
/// register of the measuring party.
pub fn run_coherent(spec: &ProtocolSpec, messages: &[MessageInput], k: usize) -> Result<RunOutcome, FabricError> {
    run_with_mode(spec, messages, k, Mode::Coherent)
}

pub fn run_with_mode(
    spec: &ProtocolSpec,
    messages: &[MessageInput],
    k: usize,
    mode: Mode,
) -> Result<RunOutcome, FabricError> {
    spec.validate()?;
    let f = spec.f();
    if k == 0 || k > f {
        return Err(FabricError::TargetOutOfRange { k, f });
    }
    if messages.len() != f {
        return Err(FabricError::Message(format!("{} messages for f = {f}", messages.len())));
    }

    let mut layout = spec.initial_layout()?;
    let mut blocks: Vec<(Vec<usize>, StateVector)> = Vec::new();
    let mut references = Vec::new();
    for (l, (msg, name)) in messages.iter().zip(&spec.message_registers).enumerate() {
        let idx = layout.index_of(name).expect("validated");
        let d = spec.message_dims[l];
        match msg {
            MessageInput::Basis(x) => {
                blocks.push((vec![idx], StateVector::basis(vec![d], &[*x])?));
            }
            MessageInput::Pure(s) => {
                if s.dims() != [d] {
                    return Err(FabricError::Message(format!(
                        "message {} has dims {:?}, expected [{d}]",
                        l + 1,
                        s.dims()
                    )));
                }
                blocks.push((vec![idx], s.clone()));
            }
            MessageInput::Purified(s) => {
                if s.dims().len() != 2 || s.dims()[0] != d {
                    return Err(FabricError::Message(format!(
                        "purified message {} has dims {:?}, expected [{d}, r]",
                        l + 1,
                        s.dims()
                    )));
                }
                let rname = format!("R{}", l + 1);
                let ridx = layout.push(Register::new(rname.clone(), s.dims()[1], Owner::Reference))?;
                references.push(rname);
                blocks.push((vec![idx, ridx], s.clone()));
            }
        }
    }
    if !references.is_empty() && references.len() != f {
        return Err(FabricError::Message(
            "either every message or none carries a reference".into(),
        ));
    }
    for pe in &spec.prior_entanglement {
        let u = layout.index_of(&pe.user).expect("validated");
        let s = layout.index_of(&pe.server).expect("validated");
        blocks.push((vec![u, s], max_entangled(pe.dim)?));
    }

    let dims = layout.dims();
    let state = product_state(&dims, &blocks)?;
    let mut ens = OutcomeEnsemble::new(
        layout,
        vec![Branch {
            probability: 1.0,
            state,
            record: Record::new(),
        }],
    )?;
    let initial = ens.clone();

    let mut resolver = match mode {
        Mode::Enumerate => Resolver::Enumerate,
        Mode::Sample(seed) => Resolver::Sample(Box::new(ChaCha8Rng::seed_from_u64(seed))),
        Mode::Coherent => Resolver::Coherent { next_env: 0 },
    };

    for op in &spec.server_setup {
        ens.apply(op, Owner::Server, &mut resolver)?;
    }
    let mut events = Vec::with_capacity(2 * spec.rounds.len());
    let mut complexity = Complexity {
        prior_ebits: spec
            .prior_entanglement
            .iter()
            .fold(0.0, |acc, p| acc + (p.dim as f64).log2()),
        ..Complexity::default()
    };
    for (i, round) in spec.rounds.iter().enumerate() {
        for op in (round.user)(k) {
            ens.apply(&op, Owner::User, &mut resolver)?;
        }
        ens.layout_mut().transfer(&round.query, Owner::User, Owner::Server)?;
        let q = qubits(ens.layout(), &round.query)?;
        complexity.upload += q;
        events.push(TransferEvent {
            round: i + 1,
            direction: Direction::Query,
            moved: round.query.clone(),
            qubits: q,
            snapshot: ens.clone(),
        });

        for op in &round.server {
            ens.apply(op, Owner::Server, &mut resolver)?;
        }
        ens.layout_mut().transfer(&round.answer, Owner::Server, Owner::User)?;
        let a = qubits(ens.layout(), &round.answer)?;
        complexity.download += a;
        events.push(TransferEvent {
            round: i + 1,
            direction: Direction::Answer,
            moved: round.answer.clone(),
            qubits: a,
            snapshot: ens.clone(),
        });
    }
    complexity.total = complexity.upload + complexity.download;

    for op in (spec.reconstruction)(k) {
        ens.apply(&op, Owner::User, &mut resolver)?;
    }
    let output = (spec.output)(k);
    let refs: Vec<&str> = output.iter().map(String::as_str).collect();
    ens.layout().check_owned(Owner::User, &refs)?;

    Ok(RunOutcome {
        final_state: ens,
        output,
        references,
        transcript: Transcript {
            protocol: spec.name.clone(),
            message_dims: spec.message_dims.clone(),
            k,
            initial,
            events,
            complexity,
        },
        mode,
    })
}

/// Tensor product of blocks placed on arbitrary registers; unlisted
/// registers are |0⟩.
fn product_state(dims: &[usize], blocks: &[(Vec<usize>, StateVector)]) -> Result<StateVector, FabricError> {
    let n = kernel::checked_size(dims)?;
    let st = kernel::strides(dims);
    let mut terms: Vec<(usize, Complex64)> = vec![(0, ONE)];
    for (regs, s) in blocks {
        let mut next = Vec::new();
        for (j, &a) in s.amplitudes().iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let off: usize = kernel::digits_of(j, s.dims())
                .iter()
                .zip(regs)
                .map(|(&d, &r)| d * st[r])
                .sum();
            next.extend(terms.iter().map(|&(o, b)| (o + off, b * a)));
        }
        terms = next;
    }
    let mut amps = vec![ZERO; n];
    for (o, a) in terms {
        amps[o] = a;
    }
    Ok(StateVector::from_raw(dims.to_vec(), amps))
}

/// Server state right after it receives the query of round `j` (1-based).
pub fn server_view(transcript: &Transcript, j: usize) -> Result<DensityOperator, FabricError> {
    transcript
        .event(j, Direction::Query)?
        .snapshot
        .density_owned(&[Owner::Server])
}

/// Final branch-averaged state on the server's registers together with any
/// reference registers.
pub fn final_server_and_reference_view(outcome: &RunOutcome) -> Result<DensityOperator, FabricError> {
    outcome.final_state.density_owned(&[Owner::Server, Owner::Reference])
}
