// SPDX-License-Identifier: Apache-2.0

//! Combinational gate-level netlists in the `.bench` dialect.

mod bench;
mod graph;
mod sim;

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bench::{parse_bench, write_bench};
pub use graph::{reachable, topo_order};
pub use sim::{simulate, Simulator};

/// Reserved prefix for key inputs; the suffix is the bit index.
pub const KEY_INPUT_PREFIX: &str = "keyinput";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{}duplicate definition of `{name}`", line_prefix(*.line))]
    Duplicate { name: String, line: Option<usize> },
    #[error("{}undefined signal `{name}` referenced by `{user}`", line_prefix(*.line))]
    Undefined {
        name: String,
        user: String,
        line: Option<usize>,
    },
    #[error("combinational cycle through `{node}`")]
    Cycle { node: String },
    #[error("{}gate `{gate}` of kind {kind} cannot take {got} input(s)", line_prefix(*.line))]
    Arity {
        gate: String,
        kind: GateKind,
        got: usize,
        line: Option<usize>,
    },
    #[error("invalid signal name `{0}`")]
    InvalidName(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("assignment does not match declared inputs: {0}")]
    Coverage(String),
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

pub type Result<T, E = NetlistError> = std::result::Result<T, E>;

/// Node kinds. `Input` covers primary and key inputs; the rest are gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    Input,
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    Not,
    Buff,
    Mux,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::Input,
        GateKind::And,
        GateKind::Nand,
        GateKind::Or,
        GateKind::Nor,
        GateKind::Xor,
        GateKind::Xnor,
        GateKind::Not,
        GateKind::Buff,
        GateKind::Mux,
    ];

    pub const COUNT: usize = Self::ALL.len();

    /// Position in [`GateKind::ALL`], used for one-hot encodings.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn keyword(self) -> &'static str {
        match self {
            GateKind::Input => "INPUT",
            GateKind::And => "AND",
            GateKind::Nand => "NAND",
            GateKind::Or => "OR",
            GateKind::Nor => "NOR",
            GateKind::Xor => "XOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buff => "BUFF",
            GateKind::Mux => "MUX",
        }
    }

    /// Parses a gate keyword (case-insensitive; `BUF` is accepted for `BUFF`).
    /// `INPUT` is not a gate and yields `None`.
    pub fn from_keyword(word: &str) -> Option<GateKind> {
        let kind = match word.to_ascii_uppercase().as_str() {
            "AND" => GateKind::And,
            "NAND" => GateKind::Nand,
            "OR" => GateKind::Or,
            "NOR" => GateKind::Nor,
            "XOR" => GateKind::Xor,
            "XNOR" => GateKind::Xnor,
            "NOT" | "INV" => GateKind::Not,
            "BUFF" | "BUF" => GateKind::Buff,
            "MUX" => GateKind::Mux,
            _ => return None,
        };
        Some(kind)
    }

    pub fn accepts_arity(self, n: usize) -> bool {
        match self {
            GateKind::Input => n == 0,
            GateKind::Not | GateKind::Buff => n == 1,
            GateKind::Mux => n == 3,
            _ => n >= 2,
        }
    }

    /// Evaluates the gate on 64 input vectors at once, one per bit lane.
    /// MUX operands are `(select, d0, d1)`.
    pub fn eval_words(self, ins: &[u64]) -> u64 {
        match self {
            GateKind::Input => unreachable!("inputs are not evaluated"),
            GateKind::And => ins.iter().fold(!0, |a, &b| a & b),
            GateKind::Nand => !ins.iter().fold(!0, |a, &b| a & b),
            GateKind::Or => ins.iter().fold(0, |a, &b| a | b),
            GateKind::Nor => !ins.iter().fold(0, |a, &b| a | b),
            GateKind::Xor => ins.iter().fold(0, |a, &b| a ^ b),
            GateKind::Xnor => !ins.iter().fold(0, |a, &b| a ^ b),
            GateKind::Not => !ins[0],
            GateKind::Buff => ins[0],
            GateKind::Mux => (!ins[0] & ins[1]) | (ins[0] & ins[2]),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<String>,
}

impl Gate {
    pub fn new(kind: GateKind, inputs: Vec<String>) -> Self {
        Gate { kind, inputs }
    }
}

pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Returns the bit index of a `keyinput<digits>` name.
pub fn key_input_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix(KEY_INPUT_PREFIX)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

pub fn key_input_name(bit: usize) -> String {
    format!("{KEY_INPUT_PREFIX}{bit}")
}

/// A validated, acyclic combinational netlist.
///
/// Values are immutable once built; every constructor checks name
/// uniqueness, signal resolution, gate arity and acyclicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    name: String,
    gates: IndexMap<String, Gate>,
    primary_inputs: Vec<String>,
    primary_outputs: Vec<String>,
    key_inputs: Vec<String>,
}

impl Netlist {
    pub fn new(
        name: impl Into<String>,
        primary_inputs: Vec<String>,
        key_inputs: Vec<String>,
        primary_outputs: Vec<String>,
        gates: IndexMap<String, Gate>,
    ) -> Result<Netlist> {
        let n = Netlist {
            name: name.into(),
            gates,
            primary_inputs,
            primary_outputs,
            key_inputs,
        };
        n.validate()?;
        Ok(n)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let inputs = self.primary_inputs.iter().chain(&self.key_inputs);
        for name in inputs.chain(self.gates.keys()) {
            if !is_valid_name(name) {
                return Err(NetlistError::InvalidName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(NetlistError::Duplicate {
                    name: name.clone(),
                    line: None,
                });
            }
        }
        for (gname, gate) in &self.gates {
            if !gate.kind.accepts_arity(gate.inputs.len()) || gate.kind == GateKind::Input {
                return Err(NetlistError::Arity {
                    gate: gname.clone(),
                    kind: gate.kind,
                    got: gate.inputs.len(),
                    line: None,
                });
            }
            for inp in &gate.inputs {
                if !seen.contains(inp.as_str()) {
                    return Err(NetlistError::Undefined {
                        name: inp.clone(),
                        user: gname.clone(),
                        line: None,
                    });
                }
            }
        }
        let mut outs = HashSet::new();
        for po in &self.primary_outputs {
            if !seen.contains(po.as_str()) {
                return Err(NetlistError::Undefined {
                    name: po.clone(),
                    user: "OUTPUT".into(),
                    line: None,
                });
            }
            if !outs.insert(po.as_str()) {
                return Err(NetlistError::Duplicate {
                    name: po.clone(),
                    line: None,
                });
            }
        }
        graph::topo_gate_indices(self).map(|_| ())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Netlist {
        self.name = name.into();
        self
    }

    pub fn gates(&self) -> &IndexMap<String, Gate> {
        &self.gates
    }

    pub fn gate(&self, name: &str) -> Option<&Gate> {
        self.gates.get(name)
    }

    pub fn primary_inputs(&self) -> &[String] {
        &self.primary_inputs
    }

    pub fn primary_outputs(&self) -> &[String] {
        &self.primary_outputs
    }

    pub fn key_inputs(&self) -> &[String] {
        &self.key_inputs
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn is_locked(&self) -> bool {
        !self.key_inputs.is_empty()
    }

    pub fn is_key_input(&self, name: &str) -> bool {
        self.key_inputs.iter().any(|k| k == name)
    }

    /// Kind of any node; `Input` for primary and key inputs.
    pub fn kind_of(&self, name: &str) -> Option<GateKind> {
        if let Some(g) = self.gates.get(name) {
            return Some(g.kind);
        }
        let is_input = self
            .primary_inputs
            .iter()
            .chain(&self.key_inputs)
            .any(|i| i == name);
        is_input.then_some(GateKind::Input)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.kind_of(name).is_some()
    }

    /// Direct successors of every node, in gate order. Inputs with no fanout map
    /// to an empty list.
    pub fn fanouts(&self) -> HashMap<&str, Vec<&str>> {
        let mut out: HashMap<&str, Vec<&str>> = HashMap::new();
        for name in self
            .primary_inputs
            .iter()
            .chain(&self.key_inputs)
            .chain(self.gates.keys())
        {
            out.entry(name.as_str()).or_default();
        }
        for (gname, gate) in &self.gates {
            for inp in &gate.inputs {
                let succ = out.get_mut(inp.as_str()).expect("validated");
                if !succ.contains(&gname.as_str()) {
                    succ.push(gname.as_str());
                }
            }
        }
        out
    }

    /// Same gates, kinds, input lists and IO declarations; the name is ignored.
    pub fn structurally_eq(&self, other: &Netlist) -> bool {
        self.gates == other.gates
            && self.primary_inputs == other.primary_inputs
            && self.primary_outputs == other.primary_outputs
            && self.key_inputs == other.key_inputs
    }
}

/// An assignment of bits to an ordered set of input names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    names: Vec<String>,
    bits: Vec<bool>,
}

impl BitVector {
    pub fn new(names: Vec<String>, bits: Vec<bool>) -> Result<BitVector> {
        if names.len() != bits.len() {
            return Err(NetlistError::Coverage(format!(
                "{} names but {} bits",
                names.len(),
                bits.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(NetlistError::Coverage(format!("`{dup}` assigned twice")));
        }
        Ok(BitVector { names, bits })
    }

    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (S, bool)>,
    ) -> Result<BitVector> {
        let (names, bits) = pairs.into_iter().map(|(n, b)| (n.into(), b)).unzip();
        BitVector::new(names, bits)
    }

    pub fn zeros(names: &[String]) -> BitVector {
        BitVector {
            names: names.to_vec(),
            bits: vec![false; names.len()],
        }
    }

    /// Bit `i` of `value` is assigned to `names[i]`.
    pub fn from_index(names: &[String], value: u64) -> BitVector {
        BitVector {
            names: names.to_vec(),
            bits: (0..names.len())
                .map(|i| i < 64 && (value >> i) & 1 == 1)
                .collect(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.bits[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.bits.iter().copied())
    }

    /// Bits reordered to follow `names`; fails unless the name sets match exactly.
    pub fn ordered_as(&self, names: &[String]) -> Result<Vec<bool>> {
        if names.len() != self.names.len() {
            return Err(NetlistError::Coverage(format!(
                "expected {} inputs, got {}",
                names.len(),
                self.names.len()
            )));
        }
        names
            .iter()
            .map(|n| {
                self.get(n)
                    .ok_or_else(|| NetlistError::Coverage(format!("missing `{n}`")))
            })
            .collect()
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
