use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ops::{rename_names, Op};
use super::{FabricError, Owner, Register, RegisterLayout};

/// Which message tuples a protocol is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InputSet {
    /// Computational basis states.
    ClassicalBasis,
    /// Arbitrary pure states.
    PureStates,
}

/// User operations as a function of the (1-based) target index.
pub type UserOps = Arc<dyn Fn(usize) -> Vec<Op> + Send + Sync>;

pub fn no_user_ops() -> UserOps {
    Arc::new(|_| Vec::new())
}

/// A maximally entangled pair |I_d⟩⟩ shared before the first round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorEntanglement {
    pub dim: usize,
    pub user: String,
    pub server: String,
}

/// One round: user map, query transfer, server map, answer transfer.
#[derive(Clone)]
pub struct RoundSpec {
    pub user: UserOps,
    pub query: Vec<String>,
    pub server: Vec<Op>,
    pub answer: Vec<String>,
}

/// Complete description of an r-round one-server protocol.
///
/// All registers start in |0⟩ except message registers (set from the
/// inputs) and prior-entanglement pairs. The server's setup runs before the
/// first query; its first-round user map plays the role of the initial
/// encoding of the target index.
#[derive(Clone)]
pub struct ProtocolSpec {
    pub name: String,
    pub message_dims: Vec<usize>,
    pub input_set: InputSet,
    pub unitary_type: bool,
    pub registers: Vec<Register>,
    pub message_registers: Vec<String>,
    pub prior_entanglement: Vec<PriorEntanglement>,
    pub server_setup: Vec<Op>,
    pub rounds: Vec<RoundSpec>,
    pub reconstruction: UserOps,
    pub output: Arc<dyn Fn(usize) -> Vec<String> + Send + Sync>,
}

impl fmt::Debug for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProtocolSpec")
            .field("name", &self.name)
            .field("message_dims", &self.message_dims)
            .field("rounds", &self.rounds.len())
            .field("registers", &self.registers)
            .finish()
    }
}

/// Upload, download and total communication in qubits, plus prior
/// entanglement in ebits.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Complexity {
    #[serde(rename = "UC")]
    pub upload: f64,
    #[serde(rename = "DC")]
    pub download: f64,
    #[serde(rename = "CC")]
    pub total: f64,
    #[serde(rename = "PE_ebits")]
    pub prior_ebits: f64,
}

pub(crate) fn qubits(layout: &RegisterLayout, names: &[String]) -> Result<f64, FabricError> {
    names.iter().map(|n| layout.get(n).map(|r| (r.dim as f64).log2())).sum()
}

impl ProtocolSpec {
    pub fn f(&self) -> usize {
        self.message_dims.len()
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    pub fn initial_layout(&self) -> Result<RegisterLayout, FabricError> {
        RegisterLayout::new(self.registers.clone())
    }

    /// Communication counted from the declared transfers, without running.
    pub fn structural_complexity(&self) -> Result<Complexity, FabricError> {
        let layout = self.initial_layout()?;
        let mut c = Complexity::default();
        for r in &self.rounds {
            c.upload += qubits(&layout, &r.query)?;
            c.download += qubits(&layout, &r.answer)?;
        }
        c.total = c.upload + c.download;
        c.prior_ebits = self
            .prior_entanglement
            .iter()
            .fold(0.0, |acc, p| acc + (p.dim as f64).log2());
        Ok(c)
    }

    /// Every operation outside the reconstruction, for target index `k`.
    fn pre_reconstruction_ops(&self, k: usize) -> Vec<Op> {
        let mut ops = self.server_setup.clone();
        for r in &self.rounds {
            ops.extend((r.user)(k));
            ops.extend(r.server.iter().cloned());
        }
        ops
    }

    /// No measurement before the reconstruction, for every target index.
    pub fn measurement_free_before_reconstruction(&self) -> bool {
        (1..=self.f().max(1)).all(|k| !self.pre_reconstruction_ops(k).iter().any(Op::is_measurement))
    }

    /// Walk the ownership map through every round for every target index
    /// without touching amplitudes.
    pub fn validate(&self) -> Result<(), FabricError> {
        if self.message_registers.len() != self.message_dims.len() {
            return Err(FabricError::Definition(format!(
                "{} message registers for {} messages",
                self.message_registers.len(),
                self.message_dims.len()
            )));
        }
        let layout = self.initial_layout()?;
        for (name, &d) in self.message_registers.iter().zip(&self.message_dims) {
            let r = layout.get(name)?;
            if r.owner != Owner::Server || r.dim != d {
                return Err(FabricError::Definition(format!(
                    "message register `{name}` must be a server register of dimension {d}"
                )));
            }
        }
        for pe in &self.prior_entanglement {
            let (u, s) = (layout.get(&pe.user)?, layout.get(&pe.server)?);
            if u.owner != Owner::User || s.owner != Owner::Server || u.dim != pe.dim || s.dim != pe.dim {
                return Err(FabricError::Definition(format!(
                    "prior entanglement {}–{} does not match the declared registers",
                    pe.user, pe.server
                )));
            }
        }
        if layout.registers().iter().any(|r| r.owner == Owner::Reference) {
            return Err(FabricError::Definition(
                "reference registers are attached at run time".into(),
            ));
        }
        if self.unitary_type && !self.measurement_free_before_reconstruction() {
            return Err(FabricError::Definition(
                "protocol flagged unitary-type measures before reconstruction".into(),
            ));
        }
        for k in 1..=self.f() {
            let mut l = layout.clone();
            for op in &self.server_setup {
                l.check_owned(Owner::Server, &op.registers())?;
            }
            for r in &self.rounds {
                for op in (r.user)(k) {
                    l.check_owned(Owner::User, &op.registers())?;
                }
                l.transfer(&r.query, Owner::User, Owner::Server)?;
                for op in &r.server {
                    l.check_owned(Owner::Server, &op.registers())?;
                }
                l.transfer(&r.answer, Owner::Server, Owner::User)?;
            }
            for op in (self.reconstruction)(k) {
                l.check_owned(Owner::User, &op.registers())?;
            }
            let out = (self.output)(k);
            let refs: Vec<&str> = out.iter().map(String::as_str).collect();
            l.check_owned(Owner::User, &refs)?;
        }
        Ok(())
    }

    /// Copy of this spec with register names substituted everywhere.
    pub fn renamed(&self, map: &HashMap<String, Vec<String>>) -> ProtocolSpec {
        let m = Arc::new(map.clone());
        let wrap_user = |ops: &UserOps| -> UserOps {
            let ops = ops.clone();
            let m = m.clone();
            Arc::new(move |k| ops(k).iter().map(|o| o.rename(&m)).collect())
        };
        let out = self.output.clone();
        let mo = m.clone();
        ProtocolSpec {
            name: self.name.clone(),
            message_dims: self.message_dims.clone(),
            input_set: self.input_set,
            unitary_type: self.unitary_type,
            registers: self.registers.clone(),
            message_registers: rename_names(&self.message_registers, map),
            prior_entanglement: self.prior_entanglement.clone(),
            server_setup: self.server_setup.iter().map(|o| o.rename(map)).collect(),
            rounds: self
                .rounds
                .iter()
                .map(|r| RoundSpec {
                    user: wrap_user(&r.user),
                    query: rename_names(&r.query, map),
                    server: r.server.iter().map(|o| o.rename(map)).collect(),
                    answer: rename_names(&r.answer, map),
                })
                .collect(),
            reconstruction: wrap_user(&self.reconstruction),
            output: Arc::new(move |k| rename_names(&out(k), &mo)),
        }
    }
}
