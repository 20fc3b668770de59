use std::sync::Arc;

use crate::fabric::{no_user_ops, FabricError, InputSet, Owner, ProtocolSpec, Register, RoundSpec};

/// Download everything: empty query, the server returns every message.
pub fn build_trivial(dims: &[usize]) -> Result<ProtocolSpec, FabricError> {
    super::check_dims(dims)?;
    let f = dims.len();
    let names: Vec<String> = (1..=f).map(|l| format!("X{l}")).collect();
    let registers = names
        .iter()
        .zip(dims)
        .map(|(n, &d)| Register::new(n.clone(), d, Owner::Server))
        .collect();
    let out = names.clone();
    Ok(ProtocolSpec {
        name: "trivial".into(),
        message_dims: dims.to_vec(),
        input_set: InputSet::PureStates,
        unitary_type: true,
        registers,
        message_registers: names.clone(),
        prior_entanglement: Vec::new(),
        server_setup: Vec::new(),
        rounds: vec![RoundSpec {
            user: no_user_ops(),
            query: Vec::new(),
            server: Vec::new(),
            answer: names,
        }],
        reconstruction: no_user_ops(),
        output: Arc::new(move |k| vec![out[k - 1].clone()]),
    })
}
