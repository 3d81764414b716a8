// SPDX-License-Identifier: Apache-2.0

//! Benchmark circuits: the ISCAS-85 c17 netlist, disjoint tilings, seeded
//! random DAG netlists, and a deliberately leaky locking used to check that
//! the attack can find a real signal.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::lock::{Gene, Genotype};
use crate::netlist::{parse_bench, Gate, GateKind, Netlist};

pub const C17_BENCH: &str = "\
# c17
INPUT(G1gat)
INPUT(G2gat)
INPUT(G3gat)
INPUT(G6gat)
INPUT(G7gat)
OUTPUT(G22gat)
OUTPUT(G23gat)
G10gat = NAND(G1gat, G3gat)
G11gat = NAND(G3gat, G6gat)
G16gat = NAND(G2gat, G11gat)
G19gat = NAND(G11gat, G7gat)
G22gat = NAND(G10gat, G16gat)
G23gat = NAND(G16gat, G19gat)
";

pub fn c17() -> Netlist {
    parse_bench("c17", C17_BENCH).expect("embedded c17 parses")
}

/// `copies` disjoint instances of `n`, node names suffixed `_t<copy>`.
pub fn tile(n: &Netlist, copies: usize) -> Netlist {
    let rename = |s: &str, c: usize| format!("{s}_t{c}");
    let mut pis = Vec::new();
    let mut pos = Vec::new();
    let mut gates = IndexMap::new();
    for c in 0..copies {
        pis.extend(n.primary_inputs().iter().map(|p| rename(p, c)));
        pos.extend(n.primary_outputs().iter().map(|p| rename(p, c)));
        for (name, g) in n.gates() {
            let inputs = g.inputs.iter().map(|i| rename(i, c)).collect();
            gates.insert(rename(name, c), Gate::new(g.kind, inputs));
        }
    }
    Netlist::new(
        format!("{}x{copies}", n.name()),
        pis,
        Vec::new(),
        pos,
        gates,
    )
    .expect("tiling is valid")
}

#[derive(Debug, Clone, Copy)]
pub struct DagConfig {
    pub inputs: usize,
    pub gates: usize,
    /// Inputs of a gate are drawn from the most recent `window` nodes with
    /// probability `locality`, otherwise from all earlier nodes.
    pub window: usize,
    pub locality: f64,
}

impl DagConfig {
    pub fn new(inputs: usize, gates: usize) -> DagConfig {
        DagConfig {
            inputs,
            gates,
            window: 12,
            locality: 0.8,
        }
    }
}

const DAG_KINDS: [(GateKind, u32); 9] = [
    (GateKind::And, 5),
    (GateKind::Nand, 6),
    (GateKind::Or, 4),
    (GateKind::Nor, 4),
    (GateKind::Xor, 2),
    (GateKind::Xnor, 1),
    (GateKind::Not, 3),
    (GateKind::Buff, 1),
    (GateKind::Mux, 1),
];

/// A seeded random combinational netlist. Every gate without fanout is a
/// primary output.
pub fn random_dag<R: Rng + ?Sized>(name: &str, cfg: DagConfig, rng: &mut R) -> Netlist {
    assert!(cfg.inputs >= 3, "need at least three inputs");
    let mut nodes: Vec<String> = (0..cfg.inputs).map(|i| format!("i{i}")).collect();
    let pis = nodes.clone();
    let mut gates = IndexMap::new();
    let mut has_fanout = vec![false; cfg.inputs + cfg.gates];
    let total_weight: u32 = DAG_KINDS.iter().map(|(_, w)| w).sum();
    for gi in 0..cfg.gates {
        let mut pick = rng.gen_range(0..total_weight);
        let kind = DAG_KINDS
            .iter()
            .find(|(_, w)| {
                if pick < *w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .map(|(k, _)| *k)
            .unwrap();
        let arity = match kind {
            GateKind::Not | GateKind::Buff => 1,
            GateKind::Mux => 3,
            _ => {
                if rng.gen_bool(0.8) {
                    2
                } else {
                    3
                }
            }
        };
        let avail = nodes.len();
        let mut ins: Vec<usize> = Vec::with_capacity(arity);
        while ins.len() < arity.min(avail) {
            let idx = if rng.gen_bool(cfg.locality) {
                avail - 1 - rng.gen_range(0..cfg.window.min(avail))
            } else {
                rng.gen_range(0..avail)
            };
            if !ins.contains(&idx) {
                ins.push(idx);
            }
        }
        for &i in &ins {
            has_fanout[i] = true;
        }
        let name = format!("n{gi}");
        gates.insert(
            name.clone(),
            Gate::new(kind, ins.iter().map(|&i| nodes[i].clone()).collect()),
        );
        nodes.push(name);
    }
    let mut pos: Vec<String> = (cfg.inputs..nodes.len())
        .filter(|&i| !has_fanout[i])
        .map(|i| nodes[i].clone())
        .collect();
    if pos.is_empty() {
        pos.push(nodes.last().unwrap().clone());
    }
    Netlist::new(name, pis, Vec::new(), pos, gates).expect("generated DAG is valid")
}

const LEAKY_KINDS: [GateKind; 4] = [GateKind::And, GateKind::Or, GateKind::Nand, GateKind::Nor];

/// A locking that leaks its key through structure.
///
/// The circuit is `2·key_length` disjoint clusters, each built from a single
/// gate kind (`a = K(p0,p1)`, `b = K(p1,p2)`, `c = K(p2,p3)`, `d = K(a,b)`,
/// `e = K(b,c)`, `f = K(d,e)`). Gene `b` locks `a → d` in cluster `2b` and
/// `c → e` in cluster `2b+1`, whose gate kind differs, so every decoy link
/// joins two unrelated clusters while every true link stays local.
pub fn leaky_benchmark<R: Rng + ?Sized>(key_length: usize, rng: &mut R) -> (Netlist, Genotype) {
    let clusters = 2 * key_length;
    let mut kinds: Vec<GateKind> = (0..clusters)
        .map(|c| LEAKY_KINDS[c % LEAKY_KINDS.len()])
        .collect();
    // shuffle within even and within odd positions so paired clusters still differ
    for parity in 0..2 {
        let mut part: Vec<GateKind> = kinds.iter().skip(parity).step_by(2).copied().collect();
        part.shuffle(rng);
        for (i, k) in part.into_iter().enumerate() {
            kinds[2 * i + parity] = k;
        }
    }
    let mut pis = Vec::new();
    let mut pos = Vec::new();
    let mut gates = IndexMap::new();
    for (c, &kind) in kinds.iter().enumerate() {
        let s = |x: &str| format!("{x}{c}");
        for p in 0..4 {
            pis.push(format!("p{p}_{c}"));
        }
        let p = |i: usize| format!("p{i}_{c}");
        let mut add = |name: String, a: String, b: String| {
            gates.insert(name, Gate::new(kind, vec![a, b]));
        };
        add(s("a"), p(0), p(1));
        add(s("b"), p(1), p(2));
        add(s("c"), p(2), p(3));
        add(s("d"), s("a"), s("b"));
        add(s("e"), s("b"), s("c"));
        add(s("f"), s("d"), s("e"));
        pos.push(s("f"));
    }
    let netlist =
        Netlist::new("leaky", pis, Vec::new(), pos, gates).expect("leaky netlist is valid");
    let genes = (0..key_length)
        .map(|b| {
            let (x, y) = (2 * b, 2 * b + 1);
            Gene {
                f_i: format!("a{x}"),
                g_i: format!("d{x}"),
                pin_i: 0,
                f_j: format!("c{y}"),
                g_j: format!("e{y}"),
                pin_j: 1,
                k: rng.gen_bool(0.5),
            }
        })
        .collect();
    (netlist, Genotype::new("leaky", genes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn c17_shape() {
        let n = c17();
        assert_eq!(n.gate_count(), 6);
        assert_eq!(n.primary_inputs().len(), 5);
        assert_eq!(n.primary_outputs().len(), 2);
        let t = tile(&n, 4);
        assert_eq!(t.gate_count(), 24);
        assert_eq!(t.primary_inputs().len(), 20);
        assert_eq!(t.name(), "c17x4");
    }

    #[test]
    fn random_dag_is_deterministic() {
        let a = random_dag("r", DagConfig::new(8, 100), &mut rng_from_seed(3));
        let b = random_dag("r", DagConfig::new(8, 100), &mut rng_from_seed(3));
        assert_eq!(a, b);
        assert_eq!(a.gate_count(), 100);
    }
}
