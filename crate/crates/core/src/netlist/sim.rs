// SPDX-License-Identifier: Apache-2.0

use super::{graph, BitVector, GateKind, Netlist, Result};

/// A netlist compiled to a flat, index-addressed program that evaluates 64
/// input vectors per call, one per bit lane.
#[derive(Debug, Clone)]
pub struct Simulator {
    n_pi: usize,
    n_key: usize,
    ops: Vec<(GateKind, Vec<usize>)>,
    outputs: Vec<usize>,
}

impl Simulator {
    pub fn new(n: &Netlist) -> Simulator {
        let order = graph::topo_gate_indices(n).expect("netlist invariant: acyclic");
        let n_pi = n.primary_inputs.len();
        let n_key = n.key_inputs.len();
        let mut slot = std::collections::HashMap::new();
        for (i, name) in n.primary_inputs.iter().chain(&n.key_inputs).enumerate() {
            slot.insert(name.as_str(), i);
        }
        let mut ops = Vec::with_capacity(order.len());
        for (pos, gi) in order.into_iter().enumerate() {
            let (name, gate) = n.gates.get_index(gi).unwrap();
            let ins = gate.inputs.iter().map(|i| slot[i.as_str()]).collect();
            ops.push((gate.kind, ins));
            slot.insert(name.as_str(), n_pi + n_key + pos);
        }
        let outputs = n.primary_outputs.iter().map(|o| slot[o.as_str()]).collect();
        Simulator {
            n_pi,
            n_key,
            ops,
            outputs,
        }
    }

    pub fn input_count(&self) -> usize {
        self.n_pi
    }

    pub fn key_count(&self) -> usize {
        self.n_key
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    /// One word per primary input and per key input, in declared order;
    /// returns one word per primary output.
    pub fn eval_words(&self, pi: &[u64], key: &[u64]) -> Vec<u64> {
        assert_eq!(pi.len(), self.n_pi, "primary input word count");
        assert_eq!(key.len(), self.n_key, "key word count");
        let mut vals = Vec::with_capacity(self.n_pi + self.n_key + self.ops.len());
        vals.extend_from_slice(pi);
        vals.extend_from_slice(key);
        let mut scratch = Vec::new();
        for (kind, ins) in &self.ops {
            scratch.clear();
            scratch.extend(ins.iter().map(|&i| vals[i]));
            vals.push(kind.eval_words(&scratch));
        }
        self.outputs.iter().map(|&o| vals[o]).collect()
    }

    pub fn eval_bits(&self, pi: &[bool], key: &[bool]) -> Vec<bool> {
        let widen = |b: &bool| if *b { !0u64 } else { 0 };
        let pi: Vec<u64> = pi.iter().map(widen).collect();
        let key: Vec<u64> = key.iter().map(widen).collect();
        self.eval_words(&pi, &key)
            .into_iter()
            .map(|w| w & 1 == 1)
            .collect()
    }
}

/// Evaluates `n` on one primary-input assignment and one key assignment.
/// Both must cover exactly the declared input sets (the key is empty for an
/// unlocked netlist).
pub fn simulate(n: &Netlist, pi: &BitVector, key: &BitVector) -> Result<BitVector> {
    let pi_bits = pi.ordered_as(&n.primary_inputs)?;
    let key_bits = key.ordered_as(&n.key_inputs)?;
    let outs = Simulator::new(n).eval_bits(&pi_bits, &key_bits);
    Ok(BitVector {
        names: n.primary_outputs.clone(),
        bits: outs,
    })
}
