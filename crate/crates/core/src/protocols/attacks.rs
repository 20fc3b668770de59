use std::fmt;
use std::sync::Arc;

use crate::fabric::{slots, FabricError, MessageInput, Op, ProtocolSpec, Record};
use crate::qcore::dft;

/// Guess of the target index (1-based) from a branch record.
pub type Extraction = Arc<dyn Fn(&Record) -> usize + Send + Sync>;

/// A specious deviation: extra server operations per round, the declared
/// recovery maps 𝓕_{S,j}, and how the server reads its guess of K.
#[derive(Clone)]
pub struct AttackSpec {
    pub name: String,
    /// Prepended to the honest server map of round j (index j−1).
    pub extra_server_ops: Vec<Vec<Op>>,
    /// Server-side recovery applied to the attacked state at round j.
    pub recovery: Vec<Vec<Op>>,
    pub extraction: Extraction,
}

impl fmt::Debug for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AttackSpec")
            .field("name", &self.name)
            .field("extra_server_ops", &self.extra_server_ops)
            .field("recovery", &self.recovery)
            .finish()
    }
}

impl AttackSpec {
    /// Honest maps, identity recovery, constant guess.
    pub fn null(spec: &ProtocolSpec) -> Self {
        let r = spec.round_count();
        Self {
            name: "null".into(),
            extra_server_ops: vec![Vec::new(); r],
            recovery: vec![Vec::new(); r],
            extraction: Arc::new(|_| 1),
        }
    }

    /// Attacked copy of `spec`; answers leave at the honest rounds.
    pub fn apply(&self, spec: &ProtocolSpec) -> Result<ProtocolSpec, FabricError> {
        let r = spec.round_count();
        if self.extra_server_ops.len() != r || self.recovery.len() != r {
            return Err(FabricError::Definition(format!(
                "attack `{}` declares {} / {} rounds, protocol has {r}",
                self.name,
                self.extra_server_ops.len(),
                self.recovery.len()
            )));
        }
        let mut out = spec.clone();
        out.name = format!("{}+{}", spec.name, self.name);
        out.unitary_type = false;
        for (round, extra) in out.rounds.iter_mut().zip(&self.extra_server_ops) {
            let mut ops = extra.clone();
            ops.append(&mut round.server);
            round.server = ops;
        }
        out.validate()?;
        Ok(out)
    }
}

/// The server measures every query register and every message register in
/// the computational basis on receipt of the first query, then continues
/// honestly. Recovery is the identity; the guess is the value found in the
/// first query register.
pub fn attack_basis_measurement(spec: &ProtocolSpec) -> Result<AttackSpec, FabricError> {
    let first = spec
        .rounds
        .first()
        .and_then(|r| r.query.first())
        .ok_or_else(|| FabricError::Definition(format!("`{}` has no query to measure", spec.name)))?
        .clone();
    let mut ops = Vec::new();
    for name in spec.rounds[0].query.iter().chain(&spec.message_registers) {
        ops.push(Op::measure(slots([name]), format!("atk:{name}")));
    }
    let mut extra = vec![Vec::new(); spec.round_count()];
    extra[0] = ops;
    let label = format!("atk:{first}");
    Ok(AttackSpec {
        name: "basis-measure".into(),
        extra_server_ops: extra,
        recovery: vec![Vec::new(); spec.round_count()],
        extraction: Arc::new(move |rec| rec.get(&label).map_or(1, |v| v + 1)),
    })
}

/// The all-|+_d⟩ message tuple, d_ℓ per message.
pub fn attack_superposition_inputs(dims: &[usize]) -> Result<Vec<MessageInput>, FabricError> {
    dims.iter()
        .map(|&d| {
            let mut s = crate::qcore::StateVector::basis(vec![d], &[0])?;
            s.apply_unitary(&dft(d)?, &[0])?;
            Ok(MessageInput::Pure(s))
        })
        .collect()
}
