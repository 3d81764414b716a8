// SPDX-License-Identifier: Apache-2.0

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::{Netlist, NetlistError, Result};

/// Kahn's algorithm over gate indices with ascending-name tie-breaking.
/// Fails with a node that lies on a cycle.
pub(crate) fn topo_gate_indices(n: &Netlist) -> Result<Vec<usize>> {
    let count = n.gates.len();
    let mut pending = vec![0usize; count];
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (gi, gate) in n.gates.values().enumerate() {
        for inp in &gate.inputs {
            if let Some(src) = n.gates.get_index_of(inp) {
                pending[gi] += 1;
                succs[src].push(gi);
            }
        }
    }
    let name = |i: usize| n.gates.get_index(i).expect("index in range").0.as_str();
    let mut ready: BinaryHeap<Reverse<(&str, usize)>> = pending
        .iter()
        .enumerate()
        .filter(|(_, &p)| p == 0)
        .map(|(i, _)| Reverse((name(i), i)))
        .collect();
    let mut order = Vec::with_capacity(count);
    while let Some(Reverse((_, gi))) = ready.pop() {
        order.push(gi);
        for &s in &succs[gi] {
            pending[s] -= 1;
            if pending[s] == 0 {
                ready.push(Reverse((name(s), s)));
            }
        }
    }
    if order.len() == count {
        return Ok(order);
    }
    // Every unsorted gate has an unsorted predecessor; walking predecessors
    // must revisit a gate, and the first revisited gate is on a cycle.
    let mut visited = vec![false; count];
    let mut cur = (0..count).find(|&i| pending[i] > 0).expect("unsorted gate");
    while !visited[cur] {
        visited[cur] = true;
        let gate = &n.gates[cur];
        cur = gate
            .inputs
            .iter()
            .filter_map(|i| n.gates.get_index_of(i))
            .find(|&p| pending[p] > 0)
            .expect("unsorted gate has unsorted predecessor");
    }
    Err(NetlistError::Cycle {
        node: name(cur).to_string(),
    })
}

/// Evaluation order: primary inputs and key inputs in declared order, then
/// gates such that each follows all of its inputs. Ties between gates are
/// broken by ascending name.
pub fn topo_order(n: &Netlist) -> Vec<&str> {
    let gates = topo_gate_indices(n).expect("netlist invariant: acyclic");
    n.primary_inputs
        .iter()
        .chain(&n.key_inputs)
        .map(String::as_str)
        .chain(
            gates
                .into_iter()
                .map(|i| n.gates.get_index(i).unwrap().0.as_str()),
        )
        .collect()
}

/// All nodes reachable from `from` along signal direction, excluding `from`.
pub fn reachable<'a>(n: &'a Netlist, from: &str) -> Result<BTreeSet<&'a str>> {
    if !n.contains(from) {
        return Err(NetlistError::UnknownNode(from.to_string()));
    }
    let fanouts = n.fanouts();
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&str> = fanouts[from].clone();
    while let Some(v) = stack.pop() {
        if seen.insert(v) {
            stack.extend(fanouts[v].iter().copied());
        }
    }
    Ok(seen)
}
