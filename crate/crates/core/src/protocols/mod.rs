//! Protocol builders and declared server attacks.
//!
//! Every builder returns a [`ProtocolSpec`] that passes ownership validation.
//! Message registers are server-owned and loaded from the run inputs; all
//! other registers start in |0⟩.

mod attacks;
mod kllgr5;
mod pr2;
mod trivial;
mod wrapper;

pub use attacks::{attack_basis_measurement, attack_superposition_inputs, AttackSpec, Extraction};
pub use kllgr5::{build_kllgr5, ClassicalPirScheme, XorScheme};
pub use pr2::{build_pr2, build_pr2b, build_pr2b_with, AncillaMode};
pub use trivial::build_trivial;
pub use wrapper::build_teleport_wrapper;

use crate::fabric::{FabricError, ProtocolSpec};
use crate::qcore::QError;

/// Names accepted by [`build_by_name`].
pub const REGISTRY: &[&str] = &[
    "trivial",
    "pr2",
    "pr2-nomeas",
    "pr2b",
    "pr2b-shared",
    "kllgr5",
    "qwrap:<inner>",
];

/// Build a registered protocol for `dims.len()` messages of the given
/// dimensions. `qwrap:<inner>` builds `<inner>` on squared dimensions and
/// wraps it. `kllgr5` needs equal power-of-two dimensions (entries of w bits).
pub fn build_by_name(name: &str, dims: &[usize]) -> Result<ProtocolSpec, FabricError> {
    if dims.is_empty() {
        return Err(FabricError::Definition("at least one message is required".into()));
    }
    if let Some(inner) = name.strip_prefix("qwrap:") {
        if inner.starts_with("qwrap:") {
            return Err(FabricError::Definition("nested wrappers are not supported".into()));
        }
        let sq: Vec<usize> = dims.iter().map(|d| d * d).collect();
        let inner = build_by_name(inner, &sq)?;
        return build_teleport_wrapper(&inner, dims);
    }
    match name {
        "trivial" => build_trivial(dims),
        "pr2" => build_pr2(dims, true),
        "pr2-nomeas" => build_pr2(dims, false),
        "pr2b" => build_pr2b(dims),
        "pr2b-shared" => build_pr2b_with(dims, AncillaMode::Shared),
        "kllgr5" => {
            let d = dims[0];
            if dims.iter().any(|&x| x != d) || !d.is_power_of_two() || d < 2 {
                return Err(FabricError::Definition(format!(
                    "kllgr5 needs equal power-of-two entry dimensions, got {dims:?}"
                )));
            }
            let scheme = XorScheme::new(dims.len(), d.trailing_zeros() as usize)?;
            build_kllgr5(&scheme)
        }
        other => Err(FabricError::Definition(format!("unknown protocol `{other}`"))),
    }
}

/// True when `name` is a registry entry (after stripping wrappers).
pub fn is_registered(name: &str) -> bool {
    let base = name.strip_prefix("qwrap:").unwrap_or(name);
    ["trivial", "pr2", "pr2-nomeas", "pr2b", "pr2b-shared", "kllgr5"].contains(&base)
}

pub(crate) fn check_dims(dims: &[usize]) -> Result<(), FabricError> {
    if dims.is_empty() {
        return Err(FabricError::Definition("at least one message is required".into()));
    }
    if let Some(&d) = dims.iter().find(|&&d| d == 0) {
        return Err(QError::InvalidDimension(d).into());
    }
    Ok(())
}
