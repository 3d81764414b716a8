// SPDX-License-Identifier: Apache-2.0

//! D-MUX locking.
//!
//! A [`Gene`] names two existing wires `f_i → (g_i, pin_i)` and
//! `f_j → (g_j, pin_j)` plus a key bit. Applying it inserts two multiplexers
//! that share one key input; both see `f_i` and `f_j` as data inputs, and
//! only the correct key value routes each driver back to its own consumer.

mod decode;
mod locker;

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{key_input_index, key_input_name, BitVector, Netlist, NetlistError};

pub use decode::{decode_key_muxes, KeyMuxPair};
pub use locker::{
    apply_genotype, repair_genotype, sample_gene, sample_random_genotype, validate_genotype,
    DmuxLocker, ValidityReport, Violation, ViolationKind, RETRIES_PER_KEY_BIT,
};

#[derive(Debug, Error)]
pub enum LockError {
    #[error("key length must be at least 1")]
    EmptyKey,
    #[error("netlist `{0}` already has key inputs")]
    AlreadyLocked(String),
    #[error("no valid gene found within {attempts} attempts; circuit too small for the requested key length")]
    Exhausted { attempts: usize },
    #[error("invalid genotype: {0}")]
    Invalid(ValidityReport),
    #[error("inserted gate name `{0}` collides with an existing signal")]
    NameCollision(String),
    #[error("malformed locked netlist: {0}")]
    Malformed(String),
    #[error("key file line {line}: {message}")]
    KeyFile { line: usize, message: String },
    #[error("genotype file: {0}")]
    GenotypeFile(#[from] serde_json::Error),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

pub type Result<T, E = LockError> = std::result::Result<T, E>;

/// A consumer gate input position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub gate: String,
    pub pin: usize,
}

mod bit_serde {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(D::Error::custom(format!(
                "key bit must be 0 or 1, got {other}"
            ))),
        }
    }
}

/// One MUX-locked locality `{f_i, f_j, g_i, g_j, k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gene {
    #[serde(rename = "fi")]
    pub f_i: String,
    #[serde(rename = "gi")]
    pub g_i: String,
    #[serde(rename = "pini")]
    pub pin_i: usize,
    #[serde(rename = "fj")]
    pub f_j: String,
    #[serde(rename = "gj")]
    pub g_j: String,
    #[serde(rename = "pinj")]
    pub pin_j: usize,
    #[serde(with = "bit_serde")]
    pub k: bool,
}

impl Gene {
    pub fn slot_i(&self) -> Slot {
        Slot {
            gate: self.g_i.clone(),
            pin: self.pin_i,
        }
    }

    pub fn slot_j(&self) -> Slot {
        Slot {
            gate: self.g_j.clone(),
            pin: self.pin_j,
        }
    }

    /// `(select, d0, d1)` data inputs of the MUX feeding `g_i` and of the MUX
    /// feeding `g_j`. Select = `k` restores the original wires.
    pub fn mux_data(&self) -> ((&str, &str), (&str, &str)) {
        let (fi, fj) = (self.f_i.as_str(), self.f_j.as_str());
        if self.k {
            ((fj, fi), (fi, fj))
        } else {
            ((fi, fj), (fj, fi))
        }
    }
}

/// Ordered genes; gene `b` owns `keyinput<b>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Genotype {
    pub origin: String,
    pub genes: Vec<Gene>,
}

impl Genotype {
    pub fn new(origin: impl Into<String>, genes: Vec<Gene>) -> Genotype {
        Genotype {
            origin: origin.into(),
            genes,
        }
    }

    pub fn key_length(&self) -> usize {
        self.genes.len()
    }

    pub fn key_bits(&self) -> Vec<bool> {
        self.genes.iter().map(|g| g.k).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("genotype serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Genotype> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A netlist locked by a genotype, with the key that unlocks it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockedNetlist {
    pub netlist: Netlist,
    pub genotype: Genotype,
    pub correct_key: BitVector,
    pub origin_name: String,
}

impl LockedNetlist {
    pub fn key_length(&self) -> usize {
        self.genotype.key_length()
    }

    /// Rebuilds the locking record from a locked netlist and its key by
    /// reading the key-controlled MUX pairs back out of the structure.
    pub fn from_parts(netlist: Netlist, key: BitVector, origin: &str) -> Result<LockedNetlist> {
        let bits = key.ordered_as(netlist.key_inputs())?;
        let pairs = decode_key_muxes(&netlist)?;
        let genes = pairs
            .iter()
            .map(|p| {
                let k = bits[p.bit];
                // mux A = MUX(key, x, y) feeds g_i; with k = 1 its d1 is f_i
                let (f_i, f_j) = if k { (&p.d1, &p.d0) } else { (&p.d0, &p.d1) };
                Gene {
                    f_i: f_i.clone(),
                    g_i: p.slots[0].gate.clone(),
                    pin_i: p.slots[0].pin,
                    f_j: f_j.clone(),
                    g_j: p.slots[1].gate.clone(),
                    pin_j: p.slots[1].pin,
                    k,
                }
            })
            .collect();
        Ok(LockedNetlist {
            correct_key: key_vector(&bits),
            genotype: Genotype::new(origin, genes),
            origin_name: origin.to_string(),
            netlist,
        })
    }
}

pub(crate) fn key_vector(bits: &[bool]) -> BitVector {
    let names = (0..bits.len()).map(key_input_name).collect();
    BitVector::new(names, bits.to_vec()).expect("distinct key names")
}

/// The correct key: gene bits in index order.
pub fn extract_key(ln: &LockedNetlist) -> BitVector {
    ln.correct_key.clone()
}

/// Key file text: `keyinput<i>=<0|1>` per bit, ascending `i`.
pub fn write_key_file(key: &BitVector) -> String {
    let mut indexed: Vec<(usize, bool)> = key
        .iter()
        .map(|(n, b)| (key_input_index(n).expect("key input name"), b))
        .collect();
    indexed.sort_unstable();
    let mut out = String::new();
    for (i, b) in indexed {
        let _ = writeln!(out, "{}={}", key_input_name(i), u8::from(b));
    }
    out
}

pub fn parse_key_file(text: &str) -> Result<BitVector> {
    let mut bits = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| LockError::KeyFile { line, message };
        let (name, value) = body
            .split_once('=')
            .ok_or_else(|| err("expected `keyinput<i>=<0|1>`".into()))?;
        let bit = key_input_index(name.trim())
            .ok_or_else(|| err(format!("`{}` is not a key input name", name.trim())))?;
        if bit != bits.len() {
            return Err(err(format!(
                "expected keyinput{}, found keyinput{bit}",
                bits.len()
            )));
        }
        match value.trim() {
            "0" => bits.push(false),
            "1" => bits.push(true),
            v => return Err(err(format!("bit value must be 0 or 1, got `{v}`"))),
        }
    }
    Ok(key_vector(&bits))
}
