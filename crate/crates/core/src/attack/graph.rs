// SPDX-License-Identifier: Apache-2.0

use std::collections::{HashMap, HashSet, VecDeque};

use super::{AttackError, LinkFeatures, Result, FEATURE_DIM};
use crate::lock::decode_key_muxes;
use crate::netlist::{GateKind, Netlist};
use crate::scalar::Real;

/// Shortest-path cap used by the features; also the value for "unreachable".
pub const PATH_CAP: usize = 6;

/// A directed link `u → (v, pin)` between attack-graph node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub u: usize,
    pub v: usize,
    pub pin: usize,
}

/// The four candidate links around one key bit.
///
/// Key value 0 connects `d0 → slots[0]` and `d1 → slots[1]`; key value 1
/// connects the crossed pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyCandidates {
    pub bit: usize,
    pub slots: [(usize, usize); 2],
    pub d0: usize,
    pub d1: usize,
}

impl KeyCandidates {
    pub fn pairing(&self, key: bool) -> [Link; 2] {
        let (a, b) = if key {
            (self.d1, self.d0)
        } else {
            (self.d0, self.d1)
        };
        [
            Link {
                u: a,
                v: self.slots[0].0,
                pin: self.slots[0].1,
            },
            Link {
                u: b,
                v: self.slots[1].0,
                pin: self.slots[1].1,
            },
        ]
    }

    pub fn links(&self) -> [Link; 4] {
        let [a, b] = self.pairing(false);
        let [c, d] = self.pairing(true);
        [a, b, c, d]
    }
}

/// Circuit graph as the attacker sees it: key MUXes and key inputs removed,
/// their consumer pins left open, and the candidate links for every key bit.
#[derive(Debug, Clone)]
pub struct AttackGraph {
    names: Vec<String>,
    kinds: Vec<GateKind>,
    /// Input count of each node in the locked netlist, open pins included.
    arity: Vec<usize>,
    edges: Vec<Link>,
    out_adj: Vec<Vec<(usize, usize)>>,
    in_adj: Vec<Vec<(usize, usize)>>,
    candidates: Vec<KeyCandidates>,
}

impl AttackGraph {
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, node: usize) -> &str {
        &self.names[node]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn kind(&self, node: usize) -> GateKind {
        self.kinds[node]
    }

    pub fn arity(&self, node: usize) -> usize {
        self.arity[node]
    }

    pub fn edges(&self) -> &[Link] {
        &self.edges
    }

    pub fn candidates(&self) -> &[KeyCandidates] {
        &self.candidates
    }

    pub fn key_length(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_gate(&self, node: usize) -> bool {
        self.kinds[node] != GateKind::Input
    }

    pub fn has_edge(&self, link: &Link) -> bool {
        self.out_adj[link.u].contains(&(link.v, link.pin))
    }

    /// Distinct undirected neighbours of `x`, ignoring `excluded`.
    fn neighbours(&self, x: usize, excluded: &Link) -> HashSet<usize> {
        let skip = |u: usize, v: usize, pin: usize| {
            u == excluded.u && v == excluded.v && pin == excluded.pin
        };
        let outs = self.out_adj[x]
            .iter()
            .filter(|&&(v, p)| !skip(x, v, p))
            .map(|&(v, _)| v);
        let ins = self.in_adj[x]
            .iter()
            .filter(|&&(u, p)| !skip(u, x, p))
            .map(|&(u, _)| u);
        outs.chain(ins).collect()
    }

    fn fanout(&self, x: usize, excluded: &Link) -> HashSet<usize> {
        self.out_adj[x]
            .iter()
            .filter(|&&(v, p)| !(x == excluded.u && v == excluded.v && p == excluded.pin))
            .map(|&(v, _)| v)
            .collect()
    }

    fn undirected_distance(&self, from: usize, to: usize, excluded: &Link) -> usize {
        if from == to {
            return 0;
        }
        let mut dist = vec![usize::MAX; self.names.len()];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x] + 1;
            if d >= PATH_CAP {
                break;
            }
            for y in self.neighbours(x, excluded) {
                if dist[y] == usize::MAX {
                    if y == to {
                        return d;
                    }
                    dist[y] = d;
                    queue.push_back(y);
                }
            }
        }
        PATH_CAP
    }

    /// Feature vector of `link`, computed on the graph with `link` itself
    /// removed (a no-op for candidate links, which are never edges).
    pub fn features<T: Real>(&self, link: Link) -> LinkFeatures<T> {
        let Link { u, v, pin } = link;
        let log1p = |x: usize| T::from_count(x).ln_1p();
        let out_deg = self.out_adj[u].iter().filter(|&&e| e != (v, pin)).count();
        let in_deg = self.in_adj[v].iter().filter(|&&e| e != (u, pin)).count();
        let nu = self.neighbours(u, &link);
        let nv = self.neighbours(v, &link);
        let common = nu
            .iter()
            .filter(|x| **x != u && **x != v && nv.contains(x))
            .count();
        let path = self.undirected_distance(u, v, &link);
        let overlap = self
            .fanout(u, &link)
            .intersection(&self.fanout(v, &link))
            .count();

        let mut x = [T::zero(); FEATURE_DIM];
        x[0] = log1p(out_deg);
        x[1] = log1p(in_deg);
        x[2] = log1p(common);
        x[3] = T::from_count(path);
        x[4] = T::from_count(pin);
        x[5 + self.kinds[u].index()] = T::one();
        x[5 + GateKind::COUNT + self.kinds[v].index()] = T::one();
        x[FEATURE_DIM - 1] = log1p(overlap);
        LinkFeatures(x)
    }
}

/// Builds the attacker's view of a locked netlist.
///
/// Key MUX pairs are recognised structurally (each key input selects two
/// mirrored MUXes); no knowledge of the key is used.
pub fn build_attack_graph(n: &Netlist) -> Result<AttackGraph> {
    if !n.is_locked() {
        return Err(AttackError::NothingToAttack);
    }
    let pairs = decode_key_muxes(n)?;
    let key_muxes: HashSet<&str> = pairs
        .iter()
        .flat_map(|p| p.muxes.iter().map(String::as_str))
        .collect();

    let mut names = Vec::new();
    let mut kinds = Vec::new();
    let mut arity = Vec::new();
    for pi in n.primary_inputs() {
        names.push(pi.clone());
        kinds.push(GateKind::Input);
        arity.push(0);
    }
    for (gname, gate) in n.gates() {
        if !key_muxes.contains(gname.as_str()) {
            names.push(gname.clone());
            kinds.push(gate.kind);
            arity.push(gate.inputs.len());
        }
    }
    let index: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    let mut edges = Vec::new();
    let mut out_adj = vec![Vec::new(); names.len()];
    let mut in_adj = vec![Vec::new(); names.len()];
    for (gname, gate) in n.gates() {
        let Some(&v) = index.get(gname.as_str()) else {
            continue;
        };
        for (pin, inp) in gate.inputs.iter().enumerate() {
            if key_muxes.contains(inp.as_str()) {
                continue;
            }
            let u = index[inp.as_str()];
            edges.push(Link { u, v, pin });
            out_adj[u].push((v, pin));
            in_adj[v].push((u, pin));
        }
    }

    let malformed = |m: String| AttackError::Malformed(m);
    let mut candidates = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| malformed(format!("`{s}` is not an attack-graph node")))
        };
        candidates.push(KeyCandidates {
            bit: p.bit,
            slots: [
                (lookup(&p.slots[0].gate)?, p.slots[0].pin),
                (lookup(&p.slots[1].gate)?, p.slots[1].pin),
            ],
            d0: lookup(&p.d0)?,
            d1: lookup(&p.d1)?,
        });
    }

    Ok(AttackGraph {
        names,
        kinds,
        arity,
        edges,
        out_adj,
        in_adj,
        candidates,
    })
}
