//! Correctness and secrecy checkers.
//!
//! Every check runs the protocol by full branch enumeration and compares
//! density operators, so a pass means equality up to the tolerance on the
//! tested inputs. For quantum inputs the tested family is a structured set
//! (all-|+⟩ tuples, maximally entangled references) plus seeded Haar-random
//! tuples; coverage is reported with every verdict.

mod checks;
mod inputs;

pub use checks::{
    check_all_round_secrecy, check_correctness, check_final_state_secrecy, check_specious, mutual_information,
    SpeciousReport,
};
pub use inputs::{message_json, test_tuples, TestTuple};

use serde::{Deserialize, Serialize};

use crate::fabric::InputSet;
use crate::qcore::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Criterion {
    FinalState,
    AllRound,
    SpeciousUndetectability,
}

/// How many inputs to test and how strictly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Seeded random tuples (quantum inputs, or classical inputs beyond the
    /// exhaustive limit).
    pub random_tuples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Classical inputs are enumerated when Π d_ℓ is at most this.
    pub exhaustive_limit: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            random_tuples: 50,
            seed: 0,
            tolerance: TOL,
            exhaustive_limit: 1 << 10,
        }
    }
}

/// Worst case found by a secrecy check; enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecrecyWitness {
    pub k: usize,
    pub k_prime: usize,
    pub round: Option<usize>,
    pub tuple: String,
    pub messages: Vec<serde_json::Value>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecrecyVerdict {
    pub protocol: String,
    pub criterion: Criterion,
    pub input_set: InputSet,
    pub max_distance: f64,
    pub witness: Option<SecrecyWitness>,
    pub pass: bool,
    pub tolerance: f64,
    pub tuples: usize,
    pub coverage: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessWitness {
    pub k: usize,
    pub tuple: String,
    pub messages: Vec<serde_json::Value>,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessVerdict {
    pub protocol: String,
    pub input_set: InputSet,
    pub min_fidelity: f64,
    pub worst: Option<CorrectnessWitness>,
    pub pass: bool,
    pub tolerance: f64,
    pub instances: usize,
    pub coverage: String,
}
