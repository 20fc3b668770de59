//! Register ownership, round-based protocol execution and transcripts.
//!
//! A protocol acts on one global state over named registers. Each register
//! has a single owner at any time; sending a register to the other party is
//! an ownership relabeling and never copies amplitudes. Measurements and
//! private randomness split the global state into weighted branches, which
//! are enumerated exhaustively unless a sampled run is requested.

mod ensemble;
mod ops;
mod run;
mod spec;

pub use ensemble::{Branch, OutcomeEnsemble, Record};
pub use ops::{rename_names, slots, Basis, Op, PermFn, SelectFn, Slot};
pub use run::{
    final_server_and_reference_view, run, run_coherent, run_sampled, run_with_mode, server_view, Direction,
    MessageInput, Mode, RunOutcome, Transcript, TranscriptJson, TransferEvent,
};
pub use spec::{no_user_ops, Complexity, InputSet, PriorEntanglement, ProtocolSpec, RoundSpec, UserOps};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::QError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Owner {
    User,
    Server,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub dim: usize,
    pub owner: Owner,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize, owner: Owner) -> Self {
        Self {
            name: name.into(),
            dim,
            owner,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FabricError {
    #[error(transparent)]
    Quantum(#[from] QError),
    #[error("protocol definition error: {0}")]
    Definition(String),
    #[error("{party:?} touched register `{register}` owned by {owner:?}")]
    Ownership {
        party: Owner,
        register: String,
        owner: Owner,
    },
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("target index {k} out of range 1..={f}")]
    TargetOutOfRange { k: usize, f: usize },
    #[error("round {round} out of range (protocol has {rounds})")]
    RoundOutOfRange { round: usize, rounds: usize },
    #[error("message mismatch: {0}")]
    Message(String),
}

/// Ordered registers with their current owners.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl RegisterLayout {
    pub fn new(registers: Vec<Register>) -> Result<Self, FabricError> {
        let mut layout = Self::default();
        for r in registers {
            layout.push(r)?;
        }
        Ok(layout)
    }

    pub fn push(&mut self, r: Register) -> Result<usize, FabricError> {
        if r.dim == 0 {
            return Err(QError::InvalidDimension(0).into());
        }
        if self.index_of(&r.name).is_some() {
            return Err(FabricError::Definition(format!("duplicate register `{}`", r.name)));
        }
        self.registers.push(r);
        Ok(self.registers.len() - 1)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.name == name)
    }

    pub fn get(&self, name: &str) -> Result<&Register, FabricError> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| FabricError::UnknownRegister(name.to_string()))
    }

    pub fn indices(&self, names: &[String]) -> Result<Vec<usize>, FabricError> {
        names
            .iter()
            .map(|n| self.index_of(n).ok_or_else(|| FabricError::UnknownRegister(n.clone())))
            .collect()
    }

    /// Indices owned by any of `owners`, in layout order.
    pub fn owned_by(&self, owners: &[Owner]) -> Vec<usize> {
        self.registers
            .iter()
            .enumerate()
            .filter(|(_, r)| owners.contains(&r.owner))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn names_owned_by(&self, owner: Owner) -> Vec<String> {
        self.registers
            .iter()
            .filter(|r| r.owner == owner)
            .map(|r| r.name.clone())
            .collect()
    }

    /// Fail unless `party` owns every listed register.
    pub fn check_owned(&self, party: Owner, names: &[&str]) -> Result<(), FabricError> {
        for n in names {
            let r = self.get(n)?;
            if r.owner != party {
                return Err(FabricError::Ownership {
                    party,
                    register: r.name.clone(),
                    owner: r.owner,
                });
            }
        }
        Ok(())
    }

    /// Hand registers from `from` to `to`.
    pub fn transfer(&mut self, names: &[String], from: Owner, to: Owner) -> Result<(), FabricError> {
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.check_owned(from, &refs)?;
        for n in names {
            let i = self.index_of(n).expect("checked above");
            self.registers[i].owner = to;
        }
        Ok(())
    }
}
