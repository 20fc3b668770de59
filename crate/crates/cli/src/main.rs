//! Command-line front end: run protocols, secrecy checks, attacks, the
//! entropy-chain audit and the communication table.
//!
//! Exit codes: 0 pass, 1 check failed, 2 usage error, 3 resource guard.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qpir::audit::{self, AuditError};
use qpir::fabric::{run_with_mode, FabricError, InputSet, MessageInput, Mode, ProtocolSpec};
use qpir::protocols::{attack_basis_measurement, attack_superposition_inputs, build_by_name, AttackSpec};
use qpir::qcore::{max_entangled, DensityOperator, QError, StateVector, TOL};
use qpir::verify::{self, Budget};

use report::{num, Format, Meta, Report};

#[derive(Parser)]
#[command(name = "qpir", version, about = "Quantum PIR protocol simulator and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one protocol instance and report communication and output.
    Run(RunArgs),
    /// Correctness and secrecy checks; exit 0 iff all requested checks pass.
    Verify(VerifyArgs),
    /// Entropy-chain audit of the communication lower bound; exit 0 iff the chain holds.
    Audit(AuditArgs),
    /// Run a server attack; exit 0 iff the protocol resists it (detectable or no leakage).
    Attack(AttackArgs),
    /// Communication of a protocol against the trivial download over several f.
    Separation(SeparationArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Registry name: trivial, pr2, pr2-nomeas, pr2b, pr2b-shared, kllgr5, qwrap:<inner>.
    #[arg(long, default_value = "pr2")]
    protocol: String,
    /// Number of messages.
    #[arg(long, default_value_t = 2)]
    f: usize,
    /// Number of database bits for kllgr5 (same as --f).
    #[arg(long)]
    n: Option<usize>,
    /// Dimension of every message.
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Explicit comma-separated message dimensions; overrides --f/--n/--d.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Equality tolerance for verdicts.
    #[arg(long, default_value_t = TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn dims(&self) -> Vec<usize> {
        match &self.dims {
            Some(d) => d.clone(),
            None => vec![self.d; self.n.unwrap_or(self.f)],
        }
    }

    fn meta(&self, dims: &[usize]) -> Meta {
        Meta {
            tool: "qpir",
            version: env!("CARGO_PKG_VERSION"),
            protocol: self.protocol.clone(),
            dims: dims.to_vec(),
            seed: self.seed,
            tolerance: self.tol,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Inputs {
    /// Computational basis messages.
    Classical,
    /// Structured superpositions only: all-|+⟩ and maximally entangled references.
    Superposition,
    /// Structured tuples plus seeded Haar-random pure tuples.
    Quantum,
    /// Every message maximally entangled with a reference (run only).
    Entangled,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunMode {
    Enumerate,
    Sample,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Target index (1-based) or `all`.
    #[arg(long, default_value = "1")]
    k: String,
    #[arg(long, value_enum, default_value_t = Inputs::Classical)]
    inputs: Inputs,
    /// Classical message values, comma-separated; default x_ℓ = (ℓ−1) mod d_ℓ.
    #[arg(long, value_delimiter = ',')]
    messages: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value_t = RunMode::Enumerate)]
    mode: RunMode,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Final,
    AllRound,
    Correctness,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Checks to run; repeatable. Default: all three.
    #[arg(long, value_enum)]
    criterion: Vec<CriterionArg>,
    #[arg(long, value_enum, default_value_t = Inputs::Classical)]
    inputs: Inputs,
    /// Seeded random tuples per check.
    #[arg(long, default_value_t = 50)]
    tuples: usize,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: Common,
    /// Target index (1-based) or `all`.
    #[arg(long, default_value = "all")]
    k: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AttackKind {
    BasisMeasure,
    Null,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = AttackKind::BasisMeasure)]
    attack: AttackKind,
    #[arg(long, value_enum, default_value_t = Inputs::Classical)]
    inputs: Inputs,
    #[arg(long, default_value_t = 50)]
    tuples: usize,
}

#[derive(Args)]
struct SeparationArgs {
    #[command(flatten)]
    common: Common,
    /// Values of f, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,64")]
    fs: Vec<usize>,
}

enum Failure {
    Usage(String),
    Guard(String),
}

impl From<FabricError> for Failure {
    fn from(e: FabricError) -> Self {
        match e {
            FabricError::Quantum(QError::ResourceGuard { .. }) => Failure::Guard(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<QError> for Failure {
    fn from(e: QError) -> Self {
        FabricError::from(e).into()
    }
}

impl From<AuditError> for Failure {
    fn from(e: AuditError) -> Self {
        match e {
            AuditError::Fabric(f) => f.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (common, result) = match &cli.command {
        Command::Run(a) => (&a.common, cmd_run(a)),
        Command::Verify(a) => (&a.common, cmd_verify(a)),
        Command::Audit(a) => (&a.common, cmd_audit(a)),
        Command::Attack(a) => (&a.common, cmd_attack(a)),
        Command::Separation(a) => (&a.common, cmd_separation(a)),
    };
    let report = match result {
        Ok(r) => r,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Guard(m)) => {
            eprintln!("resource guard: {m}");
            return ExitCode::from(3);
        }
    };
    if let Err(e) = report.emit(common.format, common.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match report.pass {
        Some(false) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}

fn build(common: &Common) -> Result<(ProtocolSpec, Vec<usize>), Failure> {
    let dims = common.dims();
    if dims.is_empty() || dims.contains(&0) {
        return Err(Failure::Usage(format!("invalid dimensions {dims:?}")));
    }
    let spec = build_by_name(&common.protocol, &dims)?;
    Ok((spec, dims))
}

fn targets(k: &str, f: usize) -> Result<Vec<usize>, Failure> {
    if k.eq_ignore_ascii_case("all") {
        return Ok((1..=f).collect());
    }
    let k: usize = k
        .parse()
        .map_err(|_| Failure::Usage(format!("--k must be an index or `all`, got `{k}`")))?;
    if k == 0 || k > f {
        return Err(Failure::Usage(format!("target index {k} out of range 1..={f}")));
    }
    Ok(vec![k])
}

fn budget(common: &Common, tuples: usize) -> Budget {
    Budget {
        random_tuples: tuples,
        seed: common.seed,
        tolerance: common.tol,
        ..Budget::default()
    }
}

/// Input family for the checkers.
fn input_family(inputs: Inputs, common: &Common, tuples: usize) -> Result<(InputSet, Budget), Failure> {
    match inputs {
        Inputs::Classical => Ok((InputSet::ClassicalBasis, budget(common, tuples))),
        Inputs::Superposition => Ok((InputSet::PureStates, budget(common, 0))),
        Inputs::Quantum => Ok((InputSet::PureStates, budget(common, tuples))),
        Inputs::Entangled => Err(Failure::Usage("--inputs entangled is only accepted by `run`".into())),
    }
}

/// ⟨ψ|ρ|ψ⟩
fn overlap(rho: &DensityOperator, psi: &StateVector) -> f64 {
    let a = psi.amplitudes();
    if a.len() != rho.dim() {
        return 0.0;
    }
    let m = rho.matrix();
    let mut s = qpir::qcore::Complex64::new(0.0, 0.0);
    for i in 0..a.len() {
        for j in 0..a.len() {
            s += a[i].conj() * m[(i, j)] * a[j];
        }
    }
    s.re
}

fn cmd_run(a: &RunArgs) -> Result<Report, Failure> {
    let c = &a.common;
    let (spec, dims) = build(c)?;
    let ks = targets(&a.k, dims.len())?;
    let messages: Vec<MessageInput> = match a.inputs {
        Inputs::Classical => {
            let xs = match &a.messages {
                Some(xs) => xs.clone(),
                None => dims.iter().enumerate().map(|(l, &d)| l % d).collect(),
            };
            if xs.len() != dims.len() || xs.iter().zip(&dims).any(|(x, d)| x >= d) {
                return Err(Failure::Usage(format!("messages {xs:?} do not fit dims {dims:?}")));
            }
            xs.into_iter().map(MessageInput::Basis).collect()
        }
        Inputs::Superposition | Inputs::Quantum => attack_superposition_inputs(&dims)?,
        Inputs::Entangled => dims
            .iter()
            .map(|&d| Ok(MessageInput::Purified(max_entangled(d)?)))
            .collect::<Result<_, QError>>()?,
    };
    let mode = match a.mode {
        RunMode::Enumerate => Mode::Enumerate,
        RunMode::Sample => Mode::Sample(c.seed),
    };

    let mut rows = Vec::new();
    let mut transcripts = Vec::new();
    for &k in &ks {
        let out = run_with_mode(&spec, &messages, k, mode)?;
        let rho = out.output_density()?;
        let diag: Vec<f64> = (0..rho.dim()).map(|i| rho.matrix()[(i, i)].re).collect();
        let (argmax, pmax) =
            diag.iter()
                .copied()
                .enumerate()
                .fold((0, f64::MIN), |best, (i, p)| if p > best.1 { (i, p) } else { best });
        let fidelity = match &messages[k - 1] {
            MessageInput::Basis(x) => diag.get(*x).copied().unwrap_or(0.0),
            MessageInput::Pure(psi) => overlap(&rho, psi),
            MessageInput::Purified(psi) => overlap(&out.output_with_reference(k)?, psi),
        };
        let cx = out.transcript.complexity;
        rows.push(vec![
            json!(k),
            json!(out.final_state.branches().len()),
            num(cx.upload),
            num(cx.download),
            num(cx.total),
            num(cx.prior_ebits),
            json!(argmax),
            num(pmax),
            num(rho.purity()),
            num(fidelity),
        ]);
        let mut t = serde_json::to_value(out.transcript.to_json()?).expect("transcript serializes");
        t["output_diagonal"] = json!(diag);
        transcripts.push(t);
    }
    Ok(Report {
        command: "run",
        meta: c.meta(&dims),
        pass: None,
        columns: vec![
            "k",
            "branches",
            "UC",
            "DC",
            "CC",
            "PE_ebits",
            "output_mode",
            "output_prob",
            "output_purity",
            "fidelity",
        ],
        rows,
        notes: vec![format!(
            "messages: {}",
            serde_json::to_string(&messages.iter().map(verify::message_json).collect::<Vec<_>>()).unwrap_or_default()
        )],
        detail: json!({ "mode": format!("{mode:?}"), "transcripts": transcripts }),
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Report, Failure> {
    let c = &a.common;
    let (spec, dims) = build(c)?;
    let (set, budget) = input_family(a.inputs, c, a.tuples)?;
    let criteria = if a.criterion.is_empty() {
        vec![CriterionArg::Correctness, CriterionArg::Final, CriterionArg::AllRound]
    } else {
        a.criterion.clone()
    };
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    let mut all = true;
    for cr in criteria {
        match cr {
            CriterionArg::Correctness => {
                let v = verify::check_correctness(&spec, set, &budget)?;
                all &= v.pass;
                let w = v.worst.as_ref();
                rows.push(vec![
                    json!("correctness"),
                    json!("min_fidelity"),
                    num(v.min_fidelity),
                    json!(v.pass),
                    Value::Null,
                    json!(w.map(|w| w.k)),
                    Value::Null,
                    json!(w.map(|w| w.tuple.clone())),
                    json!(v.coverage),
                ]);
                detail.push(serde_json::to_value(&v).expect("verdict serializes"));
            }
            CriterionArg::Final | CriterionArg::AllRound => {
                let v = if cr == CriterionArg::Final {
                    verify::check_final_state_secrecy(&spec, set, &budget)?
                } else {
                    verify::check_all_round_secrecy(&spec, set, &budget)?
                };
                all &= v.pass;
                let w = v.witness.as_ref();
                rows.push(vec![
                    json!(if cr == CriterionArg::Final {
                        "final-state"
                    } else {
                        "all-round"
                    }),
                    json!("max_distance"),
                    num(v.max_distance),
                    json!(v.pass),
                    json!(w.and_then(|w| w.round)),
                    json!(w.map(|w| w.k)),
                    json!(w.map(|w| w.k_prime)),
                    json!(w.map(|w| w.tuple.clone())),
                    json!(v.coverage),
                ]);
                detail.push(serde_json::to_value(&v).expect("verdict serializes"));
            }
        }
    }
    Ok(Report {
        command: "verify",
        meta: c.meta(&dims),
        pass: Some(all),
        columns: vec![
            "check", "measure", "value", "pass", "round", "k", "k_prime", "tuple", "coverage",
        ],
        rows,
        notes: vec![],
        detail: Value::Array(detail),
    })
}

fn cmd_audit(a: &AuditArgs) -> Result<Report, Failure> {
    let c = &a.common;
    let (spec, dims) = build(c)?;
    let ks = targets(&a.k, dims.len())?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let mut detail = Vec::new();
    let mut all = true;
    for k in ks {
        let r = audit::audit_protocol(&spec, k)?;
        for s in r.lemma3.iter().chain(&r.steps) {
            rows.push(vec![
                json!(k),
                json!(s.label),
                json!(format!("{:?}", s.relation).to_uppercase()),
                num(s.lhs),
                num(s.rhs),
                num(s.slack),
                json!(s.holds(r.tolerance)),
            ]);
        }
        notes.push(format!(
            "k={k}: CC = {:.4}, bound Σlog|X| = {:.4}, PE = {:.4} ebits, H(RS) = {:.4}, ΣH(R) = {:.4}; {}",
            r.cc, r.bound, r.prior_ebits, r.h_rs, r.sum_h_r, r.diagnosis
        ));
        all &= r.holds;
        detail.push(serde_json::to_value(&r).expect("report serializes"));
    }
    Ok(Report {
        command: "audit",
        meta: Meta {
            tolerance: audit::AUDIT_TOL,
            ..c.meta(&dims)
        },
        pass: Some(all),
        columns: vec!["k", "step", "relation", "lhs", "rhs", "slack", "ok"],
        rows,
        notes,
        detail: Value::Array(detail),
    })
}

fn cmd_attack(a: &AttackArgs) -> Result<Report, Failure> {
    let c = &a.common;
    let (spec, dims) = build(c)?;
    let (set, budget) = input_family(a.inputs, c, a.tuples)?;
    let attack: AttackSpec = match a.attack {
        AttackKind::BasisMeasure => attack_basis_measurement(&spec)?,
        AttackKind::Null => AttackSpec::null(&spec),
    };
    let r = verify::check_specious(&spec, &attack, set, &budget)?;
    let undetectable = r.undetectability.pass;
    let leaks = r.leakage_bits > c.tol;
    let resists = !(undetectable && leaks);
    let w = r.undetectability.witness.as_ref();
    Ok(Report {
        command: "attack",
        meta: c.meta(&dims),
        pass: Some(resists),
        columns: vec![
            "attack",
            "residual",
            "undetectable",
            "leakage_bits",
            "leakage_cap_bits",
            "round",
            "k",
            "tuple",
        ],
        rows: vec![vec![
            json!(r.attack),
            num(r.undetectability.max_distance),
            json!(undetectable),
            num(r.leakage_bits),
            num(r.leakage_cap_bits),
            json!(w.and_then(|w| w.round)),
            json!(w.map(|w| w.k)),
            json!(r.leakage_tuple),
        ]],
        notes: vec![format!("coverage: {}", r.undetectability.coverage)],
        detail: serde_json::to_value(&r).expect("report serializes"),
    })
}

fn cmd_separation(a: &SeparationArgs) -> Result<Report, Failure> {
    let c = &a.common;
    if a.fs.is_empty() || a.fs.contains(&0) {
        return Err(Failure::Usage("--fs needs positive values".into()));
    }
    let rows = audit::separation_table(&c.protocol, &a.fs, c.d)?;
    let cross = audit::crossover(&rows);
    Ok(Report {
        command: "separation",
        meta: c.meta(&[c.d]),
        pass: None,
        columns: vec!["f", "d", "CC", "PE_ebits", "trivial_CC", "ratio"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    json!(r.f),
                    json!(r.d),
                    num(r.protocol_cc),
                    num(r.protocol_pe_ebits),
                    num(r.trivial_cc),
                    num(r.ratio),
                ]
            })
            .collect(),
        notes: vec![match cross {
            Some(f) => format!("crossover: CC ≤ trivial from f = {f}"),
            None => "crossover: none in range".into(),
        }],
        detail: json!({ "rows": rows, "crossover": cross }),
    })
}
