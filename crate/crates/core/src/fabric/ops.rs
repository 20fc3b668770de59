use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::qcore::{Matrix, ProjectiveMeasurement};

/// A group of registers addressed as one combined register (row-major over
/// its members). Most slots hold a single register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot(pub Vec<String>);

impl Slot {
    pub fn registers(&self) -> &[String] {
        &self.0
    }
}

impl From<&str> for Slot {
    fn from(s: &str) -> Self {
        Slot(vec![s.to_string()])
    }
}

impl From<String> for Slot {
    fn from(s: String) -> Self {
        Slot(vec![s])
    }
}

impl From<&String> for Slot {
    fn from(s: &String) -> Self {
        Slot(vec![s.clone()])
    }
}

pub fn slots<I, S>(names: I) -> Vec<Slot>
where
    I: IntoIterator<Item = S>,
    S: Into<Slot>,
{
    names.into_iter().map(Into::into).collect()
}

/// Basis-state map over slot values; must be a bijection.
pub type PermFn = Arc<dyn Fn(&[usize]) -> Vec<usize> + Send + Sync>;
/// Operator to apply for a given tuple of control values (`None` = identity).
pub type SelectFn = Arc<dyn Fn(&[usize]) -> Option<Matrix> + Send + Sync>;

#[derive(Clone)]
pub enum Basis {
    Computational,
    Projective(ProjectiveMeasurement),
}

/// One local operation by a single party.
#[derive(Clone)]
pub enum Op {
    Unitary {
        targets: Vec<Slot>,
        matrix: Matrix,
    },
    Permute {
        targets: Vec<Slot>,
        map: PermFn,
    },
    Controlled {
        controls: Vec<Slot>,
        targets: Vec<Slot>,
        select: SelectFn,
    },
    /// Projective measurement with state reduction. The outcome index is
    /// written to the branch record under `label`.
    Measure {
        targets: Vec<Slot>,
        basis: Basis,
        label: String,
    },
}

impl Op {
    pub fn unitary(targets: Vec<Slot>, matrix: Matrix) -> Self {
        Op::Unitary { targets, matrix }
    }

    pub fn permute(targets: Vec<Slot>, map: impl Fn(&[usize]) -> Vec<usize> + Send + Sync + 'static) -> Self {
        Op::Permute {
            targets,
            map: Arc::new(map),
        }
    }

    pub fn controlled(
        controls: Vec<Slot>,
        targets: Vec<Slot>,
        select: impl Fn(&[usize]) -> Option<Matrix> + Send + Sync + 'static,
    ) -> Self {
        Op::Controlled {
            controls,
            targets,
            select: Arc::new(select),
        }
    }

    pub fn measure(targets: Vec<Slot>, label: impl Into<String>) -> Self {
        Op::Measure {
            targets,
            basis: Basis::Computational,
            label: label.into(),
        }
    }

    pub fn measure_in(targets: Vec<Slot>, m: ProjectiveMeasurement, label: impl Into<String>) -> Self {
        Op::Measure {
            targets,
            basis: Basis::Projective(m),
            label: label.into(),
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Op::Measure { .. })
    }

    /// Every register name the operation touches.
    pub fn registers(&self) -> Vec<&str> {
        let (a, b): (&[Slot], &[Slot]) = match self {
            Op::Unitary { targets, .. } | Op::Permute { targets, .. } | Op::Measure { targets, .. } => (targets, &[]),
            Op::Controlled { controls, targets, .. } => (controls, targets),
        };
        a.iter().chain(b).flat_map(|s| s.0.iter().map(String::as_str)).collect()
    }

    /// Substitute register names; a name may expand into several registers
    /// inside the same slot.
    pub fn rename(&self, map: &HashMap<String, Vec<String>>) -> Op {
        let fix = |v: &[Slot]| -> Vec<Slot> {
            v.iter()
                .map(|s| {
                    Slot(
                        s.0.iter()
                            .flat_map(|n| map.get(n).cloned().unwrap_or_else(|| vec![n.clone()]))
                            .collect(),
                    )
                })
                .collect()
        };
        match self {
            Op::Unitary { targets, matrix } => Op::Unitary {
                targets: fix(targets),
                matrix: matrix.clone(),
            },
            Op::Permute { targets, map: f } => Op::Permute {
                targets: fix(targets),
                map: f.clone(),
            },
            Op::Controlled {
                controls,
                targets,
                select,
            } => Op::Controlled {
                controls: fix(controls),
                targets: fix(targets),
                select: select.clone(),
            },
            Op::Measure { targets, basis, label } => Op::Measure {
                targets: fix(targets),
                basis: basis.clone(),
                label: label.clone(),
            },
        }
    }
}

impl fmt::Debug for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            Op::Unitary { .. } => "Unitary",
            Op::Permute { .. } => "Permute",
            Op::Controlled { .. } => "Controlled",
            Op::Measure { .. } => "Measure",
        };
        write!(f, "{kind}{:?}", self.registers())
    }
}

/// Rename every name in a register list.
pub fn rename_names(names: &[String], map: &HashMap<String, Vec<String>>) -> Vec<String> {
    names
        .iter()
        .flat_map(|n| map.get(n).cloned().unwrap_or_else(|| vec![n.clone()]))
        .collect()
}
