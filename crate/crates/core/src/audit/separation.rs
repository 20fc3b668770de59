use serde::{Deserialize, Serialize};

use crate::fabric::FabricError;
use crate::protocols::build_by_name;

/// Communication of a prior-entanglement protocol against the trivial
/// download at one f.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub f: usize,
    pub d: usize,
    pub protocol: String,
    pub protocol_cc: f64,
    pub protocol_pe_ebits: f64,
    pub trivial_cc: f64,
    /// trivial / protocol
    pub ratio: f64,
}

/// Structural communication of `protocol` (for example `qwrap:pr2`) and of
/// the trivial protocol for each f, all messages of dimension d.
pub fn separation_table(protocol: &str, fs: &[usize], d: usize) -> Result<Vec<SeparationRow>, FabricError> {
    fs.iter()
        .map(|&f| {
            let dims = vec![d; f];
            let p = build_by_name(protocol, &dims)?.structural_complexity()?;
            let t = build_by_name("trivial", &dims)?.structural_complexity()?;
            Ok(SeparationRow {
                f,
                d,
                protocol: protocol.to_string(),
                protocol_cc: p.total,
                protocol_pe_ebits: p.prior_ebits,
                trivial_cc: t.total,
                ratio: t.total / p.total,
            })
        })
        .collect()
}

/// Smallest f in the table at which the protocol is no more expensive than
/// the trivial download.
pub fn crossover(rows: &[SeparationRow]) -> Option<usize> {
    rows.iter()
        .filter(|r| r.protocol_cc <= r.trivial_cc + 1e-9)
        .map(|r| r.f)
        .min()
}
