use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::Budget;
use crate::fabric::{FabricError, InputSet, MessageInput};
use crate::protocols::attack_superposition_inputs;
use crate::qcore::random::haar_state;
use crate::qcore::{kernel, max_entangled, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub struct TestTuple {
    pub label: String,
    pub messages: Vec<MessageInput>,
}

fn amps_json(s: &StateVector) -> serde_json::Value {
    json!({
        "dims": s.dims(),
        "amps": s.amplitudes().iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
    })
}

/// JSON form of one message input, for witnesses.
pub fn message_json(m: &MessageInput) -> serde_json::Value {
    match m {
        MessageInput::Basis(x) => json!({ "basis": x }),
        MessageInput::Pure(s) => json!({ "pure": amps_json(s) }),
        MessageInput::Purified(s) => json!({ "purified": amps_json(s) }),
    }
}

/// Inputs for a check, and a one-line description of the coverage.
///
/// Classical: every basis tuple when Π d_ℓ ≤ `exhaustive_limit`, otherwise
/// `random_tuples` seeded draws. Quantum: the all-|+⟩ tuple, the tuple of
/// maximally entangled purifications, then `random_tuples` Haar-random pure
/// tuples.
pub fn test_tuples(
    dims: &[usize],
    input_set: InputSet,
    budget: &Budget,
) -> Result<(Vec<TestTuple>, String), FabricError> {
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    match input_set {
        InputSet::ClassicalBasis => {
            let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
            match total {
                Some(n) if n <= budget.exhaustive_limit => {
                    let tuples = (0..n)
                        .map(|i| {
                            let xs = kernel::digits_of(i, dims);
                            TestTuple {
                                label: format!("basis{xs:?}"),
                                messages: xs.into_iter().map(MessageInput::Basis).collect(),
                            }
                        })
                        .collect();
                    Ok((tuples, format!("exhaustive ({n} tuples)")))
                }
                _ => {
                    use rand::Rng;
                    let tuples = (0..budget.random_tuples)
                        .map(|_| {
                            let xs: Vec<usize> = dims.iter().map(|&d| rng.random_range(0..d)).collect();
                            TestTuple {
                                label: format!("basis{xs:?}"),
                                messages: xs.into_iter().map(MessageInput::Basis).collect(),
                            }
                        })
                        .collect();
                    Ok((
                        tuples,
                        format!("random ({} tuples, seed {})", budget.random_tuples, budget.seed),
                    ))
                }
            }
        }
        InputSet::PureStates => {
            let mut tuples = vec![
                TestTuple {
                    label: "all-plus".into(),
                    messages: attack_superposition_inputs(dims)?,
                },
                TestTuple {
                    label: "max-entangled-reference".into(),
                    messages: dims
                        .iter()
                        .map(|&d| Ok(MessageInput::Purified(max_entangled(d)?)))
                        .collect::<Result<_, FabricError>>()?,
                },
            ];
            for i in 0..budget.random_tuples {
                tuples.push(TestTuple {
                    label: format!("haar#{i}"),
                    messages: dims
                        .iter()
                        .map(|&d| Ok(MessageInput::Pure(haar_state(&mut rng, &[d])?)))
                        .collect::<Result<_, FabricError>>()?,
                });
            }
            Ok((
                tuples,
                format!(
                    "structured (all-plus, max-entangled-reference) + {} Haar tuples, seed {}",
                    budget.random_tuples, budget.seed
                ),
            ))
        }
    }
}
