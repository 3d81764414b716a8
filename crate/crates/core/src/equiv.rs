// SPDX-License-Identifier: Apache-2.0

//! Simulation-based checks of the locking contract: the correct key restores
//! the original function, and wrong keys are measured for corruption.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lock::{key_vector, LockedNetlist};
use crate::netlist::{BitVector, Netlist, NetlistError, Simulator};
use crate::seed;

/// Inputs up to which exhaustive checking is always used.
pub const EXHAUSTIVE_MAX_INPUTS: usize = 16;
/// Hard limit for an explicitly requested exhaustive check.
pub const EXHAUSTIVE_LIMIT: usize = 24;
pub const SAMPLED_VECTORS: u64 = 1000;

#[derive(Debug, Error)]
pub enum EquivError {
    #[error("interface mismatch: {0}")]
    Interface(String),
    #[error("exhaustive check of {0} inputs exceeds the limit of {EXHAUSTIVE_LIMIT}")]
    TooManyInputs(usize),
    #[error("cannot sample {requested} distinct wrong keys for a {bits}-bit key")]
    TooFewWrongKeys { requested: usize, bits: usize },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

pub type Result<T, E = EquivError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquivMode {
    /// Exhaustive up to 16 inputs, sampled above.
    #[default]
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrongKeyCorruption {
    pub key: String,
    pub corruption: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivReport {
    /// `exhaustive` or `sampled`, after resolving `auto`.
    pub mode: EquivMode,
    pub vectors: u64,
    pub mismatches: u64,
    pub equivalent: bool,
    pub corruption: Vec<WrongKeyCorruption>,
}

impl EquivReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn mean_corruption(&self) -> f64 {
        if self.corruption.is_empty() {
            return 0.0;
        }
        self.corruption.iter().map(|c| c.corruption).sum::<f64>() / self.corruption.len() as f64
    }
}

/// Primary-input words for 64-vector blocks, in the original's input order.
struct VectorSet {
    mode: EquivMode,
    blocks: Vec<(Vec<u64>, u64)>,
    count: u64,
}

fn vector_set(n_pi: usize, mode: EquivMode, seed: u64) -> Result<VectorSet> {
    let exhaustive = match mode {
        EquivMode::Exhaustive if n_pi > EXHAUSTIVE_LIMIT => {
            return Err(EquivError::TooManyInputs(n_pi))
        }
        EquivMode::Exhaustive => true,
        EquivMode::Auto | EquivMode::Sampled => n_pi <= EXHAUSTIVE_MAX_INPUTS,
    };
    let mut blocks = Vec::new();
    if exhaustive {
        let total = 1u64 << n_pi;
        let mut base = 0u64;
        while base < total {
            let lanes = (total - base).min(64);
            let words = (0..n_pi)
                .map(|i| (0..lanes).fold(0u64, |w, l| w | ((((base + l) >> i) & 1) << l)))
                .collect();
            blocks.push((words, lane_mask(lanes)));
            base += lanes;
        }
        return Ok(VectorSet {
            mode: EquivMode::Exhaustive,
            blocks,
            count: total,
        });
    }
    let mut rng = seed::derive_rng(seed, "equiv-vectors", &[]);
    let mut left = SAMPLED_VECTORS;
    while left > 0 {
        let lanes = left.min(64);
        let words = (0..n_pi).map(|_| rng.gen::<u64>()).collect();
        blocks.push((words, lane_mask(lanes)));
        left -= lanes;
    }
    Ok(VectorSet {
        mode: EquivMode::Sampled,
        blocks,
        count: SAMPLED_VECTORS,
    })
}

fn lane_mask(lanes: u64) -> u64 {
    if lanes >= 64 {
        !0
    } else {
        (1u64 << lanes) - 1
    }
}

/// Maps the locked netlist's input and output order onto the original's.
fn interface_map(orig: &Netlist, locked: &Netlist) -> Result<(Vec<usize>, Vec<usize>)> {
    if orig.is_locked() {
        return Err(EquivError::Interface(
            "reference netlist has key inputs".into(),
        ));
    }
    let map = |want: &[String], have: &[String], what: &str| -> Result<Vec<usize>> {
        let a: HashSet<&String> = want.iter().collect();
        let b: HashSet<&String> = have.iter().collect();
        if a != b || want.len() != have.len() {
            return Err(EquivError::Interface(format!("{what} differ")));
        }
        Ok(have
            .iter()
            .map(|h| want.iter().position(|w| w == h).unwrap())
            .collect())
    };
    Ok((
        map(
            orig.primary_inputs(),
            locked.primary_inputs(),
            "primary inputs",
        )?,
        map(
            orig.primary_outputs(),
            locked.primary_outputs(),
            "primary outputs",
        )?,
    ))
}

struct Miter {
    orig: Simulator,
    locked: Simulator,
    pi_map: Vec<usize>,
    po_map: Vec<usize>,
    vectors: VectorSet,
}

impl Miter {
    fn new(orig: &Netlist, locked: &Netlist, mode: EquivMode, seed: u64) -> Result<Miter> {
        let (pi_map, po_map) = interface_map(orig, locked)?;
        Ok(Miter {
            orig: Simulator::new(orig),
            locked: Simulator::new(locked),
            pi_map,
            po_map,
            vectors: vector_set(orig.primary_inputs().len(), mode, seed)?,
        })
    }

    /// Number of vectors on which some output differs under `key`.
    fn mismatches(&self, key: &[bool]) -> u64 {
        let key_words: Vec<u64> = key.iter().map(|&b| if b { !0 } else { 0 }).collect();
        let mut count = 0u64;
        for (words, mask) in &self.vectors.blocks {
            let want = self.orig.eval_words(words, &[]);
            let locked_pi: Vec<u64> = self.pi_map.iter().map(|&i| words[i]).collect();
            let got = self.locked.eval_words(&locked_pi, &key_words);
            let diff = got
                .iter()
                .zip(&self.po_map)
                .fold(0u64, |acc, (&g, &o)| acc | (g ^ want[o]));
            count += u64::from((diff & mask).count_ones());
        }
        count
    }
}

/// Compares `orig` with `locked` under `key` on every vector of the chosen
/// mode. Equivalent iff no vector mismatches.
pub fn check_equivalence(
    orig: &Netlist,
    locked: &Netlist,
    key: &BitVector,
    mode: EquivMode,
    seed: u64,
) -> Result<EquivReport> {
    let key_bits = key.ordered_as(locked.key_inputs())?;
    let miter = Miter::new(orig, locked, mode, seed)?;
    let mismatches = miter.mismatches(&key_bits);
    Ok(EquivReport {
        mode: miter.vectors.mode,
        vectors: miter.vectors.count,
        mismatches,
        equivalent: mismatches == 0,
        corruption: Vec::new(),
    })
}

pub fn check_locked(
    orig: &Netlist,
    ln: &LockedNetlist,
    mode: EquivMode,
    seed: u64,
) -> Result<EquivReport> {
    check_equivalence(orig, &ln.netlist, &ln.correct_key, mode, seed)
}

/// Correct-key check plus, for `wrong_keys` distinct keys other than the
/// correct one, the fraction of vectors with at least one wrong output. Zero
/// corruption is reported, not treated as an error.
pub fn corruption_rate<R: Rng + ?Sized>(
    orig: &Netlist,
    ln: &LockedNetlist,
    wrong_keys: usize,
    mode: EquivMode,
    rng: &mut R,
) -> Result<EquivReport> {
    let correct = ln.correct_key.ordered_as(ln.netlist.key_inputs())?;
    let bits = correct.len();
    let available = if bits >= 63 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    };
    if bits == 0 || wrong_keys as u64 > available {
        return Err(EquivError::TooFewWrongKeys {
            requested: wrong_keys,
            bits,
        });
    }
    let miter = Miter::new(orig, &ln.netlist, mode, rng.gen())?;
    let mismatches = miter.mismatches(&correct);

    let mut seen: HashSet<Vec<bool>> = HashSet::from([correct.clone()]);
    let mut corruption = Vec::with_capacity(wrong_keys);
    while corruption.len() < wrong_keys {
        let candidate: Vec<bool> = (0..bits).map(|_| rng.gen_bool(0.5)).collect();
        if !seen.insert(candidate.clone()) {
            continue;
        }
        let bad = miter.mismatches(&candidate);
        corruption.push(WrongKeyCorruption {
            key: key_vector(&candidate).to_string(),
            corruption: bad as f64 / miter.vectors.count as f64,
        });
    }
    Ok(EquivReport {
        mode: miter.vectors.mode,
        vectors: miter.vectors.count,
        mismatches,
        equivalent: mismatches == 0,
        corruption,
    })
}
