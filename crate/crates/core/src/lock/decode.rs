// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use super::{LockError, Result, Slot};
use crate::netlist::{key_input_index, GateKind, Netlist};

/// A key-controlled MUX pair read from a locked netlist.
///
/// `muxes[0] = MUX(key, d0, d1)` feeds `slots[0]` and
/// `muxes[1] = MUX(key, d1, d0)` feeds `slots[1]`; `muxes[0]` is the one that
/// comes first in gate order. Key value 0 therefore connects `d0 → slots[0]`
/// and `d1 → slots[1]`, key value 1 the crossed pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMuxPair {
    pub bit: usize,
    pub key: String,
    pub muxes: [String; 2],
    pub slots: [Slot; 2],
    pub d0: String,
    pub d1: String,
}

fn malformed(msg: impl Into<String>) -> LockError {
    LockError::Malformed(msg.into())
}

/// Finds the MUX pair controlled by each key input, ordered by key bit.
///
/// Every key input must drive the select pin of exactly two MUXes with
/// mirrored data inputs, each feeding exactly one gate pin.
pub fn decode_key_muxes(n: &Netlist) -> Result<Vec<KeyMuxPair>> {
    let k = n.key_inputs().len();
    let mut bits: Vec<usize> = n
        .key_inputs()
        .iter()
        .map(|name| {
            key_input_index(name).ok_or_else(|| malformed(format!("bad key name `{name}`")))
        })
        .collect::<Result<_>>()?;
    bits.sort_unstable();
    if bits != (0..k).collect::<Vec<_>>() {
        return Err(malformed("key inputs are not keyinput0..keyinput<K-1>"));
    }

    let mut muxes_of: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut consumers: HashMap<&str, Vec<Slot>> = HashMap::new();
    for (gname, gate) in n.gates() {
        for (pin, inp) in gate.inputs.iter().enumerate() {
            if n.is_key_input(inp) {
                if gate.kind != GateKind::Mux || pin != 0 {
                    return Err(malformed(format!(
                        "key input `{inp}` drives `{gname}` pin {pin}"
                    )));
                }
                muxes_of
                    .entry(inp.as_str())
                    .or_default()
                    .push(gname.as_str());
            }
            consumers.entry(inp.as_str()).or_default().push(Slot {
                gate: gname.clone(),
                pin,
            });
        }
    }

    let mut pairs = Vec::with_capacity(k);
    for bit in 0..k {
        let key = crate::netlist::key_input_name(bit);
        let muxes = muxes_of.get(key.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        let [a, b] = muxes else {
            return Err(malformed(format!(
                "`{key}` controls {} MUXes, expected 2",
                muxes.len()
            )));
        };
        let (ga, gb) = (n.gate(a).unwrap(), n.gate(b).unwrap());
        let (d0, d1) = (&ga.inputs[1], &ga.inputs[2]);
        if gb.inputs[1] != *d1 || gb.inputs[2] != *d0 || d0 == d1 {
            return Err(malformed(format!(
                "MUXes `{a}` and `{b}` do not mirror each other"
            )));
        }
        if [d0, d1]
            .iter()
            .any(|d| muxes_of.values().flatten().any(|m| m == d))
        {
            return Err(malformed(format!(
                "`{key}` MUX data input is another key MUX"
            )));
        }
        let mut slots = Vec::with_capacity(2);
        for m in [a, b] {
            if n.primary_outputs().iter().any(|o| o == m) {
                return Err(malformed(format!("key MUX `{m}` is a primary output")));
            }
            match consumers.get(m).map(Vec::as_slice) {
                Some([slot]) => slots.push(slot.clone()),
                _ => {
                    return Err(malformed(format!(
                        "key MUX `{m}` must feed exactly one gate pin"
                    )))
                }
            }
        }
        let slot_b = slots.pop().unwrap();
        let slot_a = slots.pop().unwrap();
        pairs.push(KeyMuxPair {
            bit,
            key,
            muxes: [a.to_string(), b.to_string()],
            slots: [slot_a, slot_b],
            d0: d0.clone(),
            d1: d1.clone(),
        });
    }
    Ok(pairs)
}
