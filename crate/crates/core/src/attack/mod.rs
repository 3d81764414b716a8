// SPDX-License-Identifier: Apache-2.0

//! Structural link-prediction attack on MUX-locked netlists.
//!
//! The attacker removes the key MUXes, learns what a real wire looks like
//! from the circuit's own wiring (existing edges against random non-edges),
//! and then, for each key bit, compares the two ways of reconnecting the open
//! pins. Only structure is used; the key is consulted solely to score the
//! predictions.

mod classifier;
mod graph;
mod sampling;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lock::{LockError, LockedNetlist};
use crate::netlist::Netlist;
use crate::scalar::Real;
use crate::seed;

pub use classifier::{loss_and_gradient, standardisation, LinkClassifier, LinkScorer, TrainConfig};
pub use graph::{build_attack_graph, AttackGraph, KeyCandidates, Link, PATH_CAP};
pub use sampling::{sample_training_links, LabeledLink};

/// Link feature layout: out-degree(u), in-degree(v), common neighbours,
/// capped undirected distance, pin, one-hot kind(u), one-hot kind(v),
/// fanout overlap. Degrees and counts are `ln(1 + x)`.
pub const FEATURE_DIM: usize = 26;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("netlist has no key inputs: nothing to attack")]
    NothingToAttack,
    #[error("malformed locked netlist: {0}")]
    Malformed(String),
    #[error("degenerate attack graph: {0}")]
    Degenerate(String),
    #[error("classifier training: {0}")]
    Training(String),
    #[error("key has {got} bits but the netlist has {expected} key inputs")]
    KeyLength { expected: usize, got: usize },
}

impl From<LockError> for AttackError {
    fn from(e: LockError) -> Self {
        AttackError::Malformed(e.to_string())
    }
}

pub type Result<T, E = AttackError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkFeatures<T>(pub [T; FEATURE_DIM]);

impl<T: Real> LinkFeatures<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }
}

pub fn extract_features<T: Real>(g: &AttackGraph, link: Link) -> LinkFeatures<T> {
    g.features(link)
}

/// Which bits the fitness accuracy is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AccuracyMode {
    /// All key bits, abstentions credited one half.
    #[default]
    AllBits,
    /// Decided bits only (the report's precision).
    DecidedOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig<T> {
    /// Margins within `±theta` abstain.
    pub theta: T,
    pub max_positives: usize,
    pub train: TrainConfig<T>,
    pub accuracy_mode: AccuracyMode,
}

impl<T: Real> Default for AttackConfig<T> {
    fn default() -> Self {
        AttackConfig {
            theta: T::lit(0.05),
            max_positives: 2000,
            train: TrainConfig::default(),
            accuracy_mode: AccuracyMode::AllBits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prediction {
    Bit(bool),
    Abstain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitReport<T> {
    pub bit: usize,
    pub pred: Prediction,
    /// True-pairing score minus crossed-pairing score. Positive means the
    /// attack leaned towards the correct key value.
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport<T> {
    pub bits: Vec<BitReport<T>>,
    pub accuracy: T,
    pub precision: T,
    pub decided: usize,
}

#[derive(Serialize)]
#[serde(untagged)]
enum PredJson {
    Bit(u8),
    Abstain(&'static str),
}

#[derive(Serialize)]
struct BitJson {
    bit: usize,
    pred: PredJson,
    margin: f64,
}

#[derive(Serialize)]
struct ReportJson {
    accuracy: f64,
    precision: f64,
    decided: usize,
    bits: Vec<BitJson>,
}

impl<T: Real> AttackReport<T> {
    /// Aggregates per-bit outcomes against the correct key.
    pub fn from_bits(bits: Vec<BitReport<T>>, correct_key: &[bool]) -> AttackReport<T> {
        let mut correct = 0usize;
        let mut decided = 0usize;
        for b in &bits {
            if let Prediction::Bit(p) = b.pred {
                decided += 1;
                if p == correct_key[b.bit] {
                    correct += 1;
                }
            }
        }
        let abstained = bits.len() - decided;
        let k = T::from_count(bits.len().max(1));
        let accuracy = (T::from_count(correct) + T::lit(0.5) * T::from_count(abstained)) / k;
        let precision = if decided == 0 {
            T::one()
        } else {
            T::from_count(correct) / T::from_count(decided)
        };
        AttackReport {
            bits,
            accuracy,
            precision,
            decided,
        }
    }

    pub fn accuracy_for(&self, mode: AccuracyMode) -> T {
        match mode {
            AccuracyMode::AllBits => self.accuracy,
            AccuracyMode::DecidedOnly => self.precision,
        }
    }

    pub fn to_json(&self) -> String {
        let r = ReportJson {
            accuracy: self.accuracy.to_f64_lossy(),
            precision: self.precision.to_f64_lossy(),
            decided: self.decided,
            bits: self
                .bits
                .iter()
                .map(|b| BitJson {
                    bit: b.bit,
                    pred: match b.pred {
                        Prediction::Bit(v) => PredJson::Bit(u8::from(v)),
                        Prediction::Abstain => PredJson::Abstain("abstain"),
                    },
                    // + 0.0 folds -0.0
                    margin: b.margin.to_f64_lossy() + 0.0,
                })
                .collect(),
        };
        serde_json::to_string(&r).expect("report serialises")
    }
}

/// Scores the four candidates of every key bit and predicts the key value
/// whose pairing scores higher, abstaining when the margin is within `theta`.
pub fn predict_keys<T: Real, S: LinkScorer<T> + ?Sized>(
    g: &AttackGraph,
    scorer: &S,
    theta: T,
    correct_key: &[bool],
) -> Result<AttackReport<T>> {
    if correct_key.len() != g.key_length() {
        return Err(AttackError::KeyLength {
            expected: g.key_length(),
            got: correct_key.len(),
        });
    }
    let score = |l: Link| scorer.score(&g.features(l));
    let bits = g
        .candidates()
        .iter()
        .map(|c| {
            let [a0, b0] = c.pairing(false);
            let [a1, b1] = c.pairing(true);
            // positive favours key value 0
            let lean = (score(a0) + score(b0)) - (score(a1) + score(b1));
            let pred = if lean > theta {
                Prediction::Bit(false)
            } else if lean < -theta {
                Prediction::Bit(true)
            } else {
                Prediction::Abstain
            };
            let margin = if correct_key[c.bit] { -lean } else { lean };
            BitReport {
                bit: c.bit,
                pred,
                margin,
            }
        })
        .collect();
    Ok(AttackReport::from_bits(bits, correct_key))
}

/// Trains a classifier on `g`'s own links with a stream derived from `seed`.
pub fn train_on_graph<T: Real>(
    g: &AttackGraph,
    cfg: &AttackConfig<T>,
    seed: u64,
) -> Result<LinkClassifier<T>> {
    let mut rng = seed::derive_rng(seed, "attack-train", &[]);
    let links = sample_training_links(g, cfg.max_positives, &mut rng)?;
    let data: Vec<(LinkFeatures<T>, bool)> = links
        .iter()
        .map(|l| (g.features(l.link), l.label))
        .collect();
    LinkClassifier::train(&data, &cfg.train)
}

/// Full attack on a locked netlist given its correct key (used for scoring only).
pub fn run_attack<T: Real>(
    locked: &Netlist,
    correct_key: &[bool],
    cfg: &AttackConfig<T>,
    seed: u64,
) -> Result<AttackReport<T>> {
    let g = build_attack_graph(locked)?;
    if correct_key.len() != g.key_length() {
        return Err(AttackError::KeyLength {
            expected: g.key_length(),
            got: correct_key.len(),
        });
    }
    let clf = train_on_graph(&g, cfg, seed)?;
    predict_keys(&g, &clf, cfg.theta, correct_key)
}

/// Attack accuracy with default settings.
pub fn attack_accuracy<T: Real>(ln: &LockedNetlist, seed: u64) -> Result<T> {
    let cfg = AttackConfig::<T>::default();
    let report = run_attack(&ln.netlist, ln.correct_key.bits(), &cfg, seed)?;
    Ok(report.accuracy_for(cfg.accuracy_mode))
}
