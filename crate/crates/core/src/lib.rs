//! Simulation and verification harness for one-server quantum private
//! information retrieval (QPIR) protocols over qudits.
//!
//! The crate is layered bottom-up:
//!
//! - [`qcore`]: dense complex linear algebra, generalized Paulis, Bell
//!   measurements, entropies and channels.
//! - [`fabric`]: registers with owners, round-based execution by exhaustive
//!   branch enumeration, transcripts and communication accounting.
//! - [`protocols`]: concrete protocol builders and server attacks.
//! - [`verify`]: correctness and secrecy checkers.
//! - [`audit`]: entropy-chain evaluation of the communication lower bound on
//!   executed transcripts.

pub mod audit;
pub mod fabric;
pub mod protocols;
pub mod qcore;
pub mod verify;
