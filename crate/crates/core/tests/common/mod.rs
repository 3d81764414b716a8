// SPDX-License-Identifier: Apache-2.0

//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use autolock::{Genotype, Netlist};

pub const TINY: &str = "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(n2)\nn1 = AND(a, b)\nn2 = OR(n1, c)\n";

pub fn tiny() -> Netlist {
    autolock::netlist::parse_bench("tiny", TINY).unwrap()
}

pub fn c17_file() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/c17.bench")).unwrap()
}

/// c17 outputs `G22gat | G23gat << 1` for input index `v`, where bit `i` of
/// `v` drives the i-th declared input (G1, G2, G3, G6, G7). Computed with a
/// standalone script from the NAND equations.
pub const C17_TRUTH: [u8; 32] = [
    0, 0, 3, 3, 0, 1, 3, 3, 0, 0, 3, 3, 0, 1, 0, 1, 2, 2, 3, 3, 2, 3, 3, 3, 2, 2, 3, 3, 0, 1, 0, 1,
];

/// Directed edges by name, from the gate input lists.
pub fn edges(n: &Netlist) -> BTreeSet<(String, String)> {
    n.gates()
        .iter()
        .flat_map(|(g, gate)| gate.inputs.iter().map(move |i| (i.clone(), g.clone())))
        .collect()
}

/// Recursive three-colour DFS cycle check.
pub fn has_cycle(edges: &BTreeSet<(String, String)>) -> bool {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default();
    }
    fn visit<'a>(
        x: &'a str,
        adj: &BTreeMap<&'a str, Vec<&'a str>>,
        colour: &mut BTreeMap<&'a str, u8>,
    ) -> bool {
        match colour.get(x) {
            Some(1) => return true,
            Some(2) => return false,
            _ => {}
        }
        colour.insert(x, 1);
        for &y in &adj[x] {
            if visit(y, adj, colour) {
                return true;
            }
        }
        colour.insert(x, 2);
        false
    }
    let mut colour = BTreeMap::new();
    let nodes: Vec<&str> = adj.keys().copied().collect();
    nodes.into_iter().any(|x| visit(x, &adj, &mut colour))
}

/// Original edges plus every gene's cross connections `f_j → g_i`, `f_i → g_j`.
pub fn locked_edges(n: &Netlist, g: &Genotype) -> BTreeSet<(String, String)> {
    let mut e = edges(n);
    for gene in &g.genes {
        e.insert((gene.f_j.clone(), gene.g_i.clone()));
        e.insert((gene.f_i.clone(), gene.g_j.clone()));
    }
    e
}

/// Checks gene invariants and joint acyclicity from scratch.
pub fn genotype_ok(n: &Netlist, g: &Genotype) -> bool {
    let mut slots = BTreeSet::new();
    for gene in &g.genes {
        let ok_i = n.gate(&gene.g_i).and_then(|x| x.inputs.get(gene.pin_i)) == Some(&gene.f_i);
        let ok_j = n.gate(&gene.g_j).and_then(|x| x.inputs.get(gene.pin_j)) == Some(&gene.f_j);
        if !ok_i || !ok_j || gene.f_i == gene.f_j {
            return false;
        }
        if !slots.insert((gene.g_i.clone(), gene.pin_i))
            || !slots.insert((gene.g_j.clone(), gene.pin_j))
        {
            return false;
        }
    }
    !g.genes.is_empty() && !has_cycle(&locked_edges(n, g))
}

/// Evaluates a netlist by recursive descent over names.
pub fn eval_by_name(
    n: &Netlist,
    values: &BTreeMap<String, bool>,
    node: &str,
    memo: &mut BTreeMap<String, bool>,
) -> bool {
    if let Some(&v) = values.get(node).or(memo.get(node)) {
        return v;
    }
    let gate = n.gate(node).unwrap();
    let ins: Vec<bool> = gate
        .inputs
        .iter()
        .map(|i| eval_by_name(n, values, i, memo))
        .collect();
    use autolock::GateKind::*;
    let v = match gate.kind {
        And => ins.iter().all(|&x| x),
        Nand => !ins.iter().all(|&x| x),
        Or => ins.iter().any(|&x| x),
        Nor => !ins.iter().any(|&x| x),
        Xor => ins.iter().filter(|&&x| x).count() % 2 == 1,
        Xnor => ins.iter().filter(|&&x| x).count() % 2 == 0,
        Not => !ins[0],
        Buff => ins[0],
        Mux => {
            if ins[0] {
                ins[2]
            } else {
                ins[1]
            }
        }
        Input => unreachable!(),
    };
    memo.insert(node.to_string(), v);
    v
}

/// Output bits of `n` for the given named inputs.
pub fn outputs_by_name(n: &Netlist, values: &BTreeMap<String, bool>) -> Vec<bool> {
    let mut memo = BTreeMap::new();
    n.primary_outputs()
        .iter()
        .map(|o| eval_by_name(n, values, o, &mut memo))
        .collect()
}
