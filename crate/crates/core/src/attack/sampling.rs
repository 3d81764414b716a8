// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{AttackError, AttackGraph, Link, Result};

/// A training link with its label (`true` for an existing wire).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledLink {
    pub link: Link,
    pub label: bool,
}

/// Draws a balanced self-supervised training set from the graph's own wiring.
///
/// Positives are up to `max_positives` existing edges sampled without
/// replacement. Negatives are distinct `(u, v)` pairs, `v` a gate, that are
/// neither wired nor a candidate pair of any key bit, each given a random pin
/// of `v`. If fewer negatives exist than positives, positives are truncated
/// to keep the classes balanced.
pub fn sample_training_links<R: Rng + ?Sized>(
    g: &AttackGraph,
    max_positives: usize,
    rng: &mut R,
) -> Result<Vec<LabeledLink>> {
    let edges = g.edges();
    if edges.is_empty() {
        return Err(AttackError::Degenerate("graph has no edges".into()));
    }
    let mut positives: Vec<Link> = if edges.len() > max_positives {
        let mut picked = index::sample(rng, edges.len(), max_positives).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| edges[i]).collect()
    } else {
        edges.to_vec()
    };

    let mut forbidden: HashSet<(usize, usize)> = edges.iter().map(|l| (l.u, l.v)).collect();
    for c in g.candidates() {
        forbidden.extend(c.links().iter().map(|l| (l.u, l.v)));
    }
    let gates: Vec<usize> = (0..g.node_count()).filter(|&v| g.is_gate(v)).collect();
    let allowed = |u: usize, v: usize, forbidden: &HashSet<(usize, usize)>| {
        u != v && !forbidden.contains(&(u, v))
    };

    let target = positives.len();
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(target);
    let budget = 50 * target + 1000;
    for _ in 0..budget {
        if chosen.len() == target {
            break;
        }
        let u = rng.gen_range(0..g.node_count());
        let v = gates[rng.gen_range(0..gates.len())];
        if allowed(u, v, &forbidden) {
            forbidden.insert((u, v));
            chosen.push((u, v));
        }
    }
    if chosen.len() < target {
        // dense graph: enumerate what is left
        let mut rest: Vec<(usize, usize)> = gates
            .iter()
            .flat_map(|&v| (0..g.node_count()).map(move |u| (u, v)))
            .filter(|&(u, v)| allowed(u, v, &forbidden))
            .collect();
        rest.shuffle(rng);
        rest.truncate(target - chosen.len());
        chosen.extend(rest);
    }
    if chosen.is_empty() {
        return Err(AttackError::Degenerate("no valid negative links".into()));
    }
    positives.truncate(chosen.len());

    let mut out: Vec<LabeledLink> = positives
        .into_iter()
        .map(|link| LabeledLink { link, label: true })
        .collect();
    for (u, v) in chosen {
        let pin = rng.gen_range(0..g.arity(v));
        out.push(LabeledLink {
            link: Link { u, v, pin },
            label: false,
        });
    }
    Ok(out)
}
