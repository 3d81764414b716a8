// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use rand::Rng;

use super::{key_vector, Gene, Genotype, LockError, LockedNetlist, Result};
use crate::netlist::{key_input_name, Gate, GateKind, Netlist};

/// Attempts allowed per sampled gene, per key bit.
pub const RETRIES_PER_KEY_BIT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownGate,
    PinOutOfRange,
    /// The named driver is not the signal at that pin in the original netlist.
    DriverMismatch,
    KeyDriver,
    SameDriver,
    SameSlot,
    /// A slot is already locked by an earlier gene.
    SlotConflict,
    /// The gene's cross connections close a combinational cycle.
    Cycle,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::UnknownGate => "consumer is not a gate",
            ViolationKind::PinOutOfRange => "pin index out of range",
            ViolationKind::DriverMismatch => "driver is not connected at that pin",
            ViolationKind::KeyDriver => "driver is a key input",
            ViolationKind::SameDriver => "both drivers are the same signal",
            ViolationKind::SameSlot => "both slots are the same pin",
            ViolationKind::SlotConflict => "slot already locked by an earlier gene",
            ViolationKind::Cycle => "cross connections create a cycle",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub gene: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidityReport {
    /// The genotype has no genes.
    pub empty: bool,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        !self.empty && self.violations.is_empty()
    }

    pub fn violating_genes(&self) -> BTreeSet<usize> {
        self.violations.iter().map(|v| v.gene).collect()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            f.write_str("empty genotype")?;
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 || self.empty {
                f.write_str("; ")?;
            }
            write!(f, "gene {}: {}", v.gene, v.kind)?;
        }
        Ok(())
    }
}

/// `(gate, pin)` by node index.
type Pin = (usize, usize);
/// `(driver, consumer)` by node index.
type Edge = (usize, usize);

#[derive(Debug, Clone, Copy)]
struct SlotRef {
    gate: usize,
    pin: usize,
    driver: usize,
}

#[derive(Debug, Clone, Copy)]
struct Resolved {
    f_i: usize,
    f_j: usize,
    slot_i: Pin,
    slot_j: Pin,
}

impl Resolved {
    fn cross_edges(&self) -> [Edge; 2] {
        [(self.f_j, self.slot_i.0), (self.f_i, self.slot_j.0)]
    }
}

/// Index over an unlocked netlist for sampling, validating and applying
/// genotypes. Build once and reuse; all methods take `&self`.
#[derive(Debug)]
pub struct DmuxLocker<'a> {
    netlist: &'a Netlist,
    index: HashMap<&'a str, usize>,
    names: Vec<&'a str>,
    succ: Vec<Vec<usize>>,
    slots: Vec<SlotRef>,
}

impl<'a> DmuxLocker<'a> {
    pub fn new(netlist: &'a Netlist) -> Result<DmuxLocker<'a>> {
        if netlist.is_locked() {
            return Err(LockError::AlreadyLocked(netlist.name().to_string()));
        }
        let names: Vec<&str> = netlist
            .primary_inputs()
            .iter()
            .chain(netlist.gates().keys())
            .map(String::as_str)
            .collect();
        let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut succ = vec![Vec::new(); names.len()];
        let mut slots = Vec::new();
        for (gname, gate) in netlist.gates() {
            let g = index[gname.as_str()];
            for (pin, inp) in gate.inputs.iter().enumerate() {
                let d = index[inp.as_str()];
                if !succ[d].contains(&g) {
                    succ[d].push(g);
                }
                slots.push(SlotRef {
                    gate: g,
                    pin,
                    driver: d,
                });
            }
        }
        Ok(DmuxLocker {
            netlist,
            index,
            names,
            succ,
            slots,
        })
    }

    pub fn netlist(&self) -> &'a Netlist {
        self.netlist
    }

    /// Number of lockable gate pins.
    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    fn acyclic_with(&self, extra: &[Edge]) -> bool {
        let n = self.names.len();
        let mut indeg = vec![0usize; n];
        let mut extra_succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in &self.succ {
            for &v in s {
                indeg[v] += 1;
            }
        }
        for &(u, v) in extra {
            indeg[v] += 1;
            extra_succ[u].push(v);
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut done = 0;
        while let Some(u) = stack.pop() {
            done += 1;
            for &v in self.succ[u].iter().chain(&extra_succ[u]) {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            }
        }
        done == n
    }

    fn resolve(&self, gene: &Gene) -> std::result::Result<Resolved, ViolationKind> {
        let slot = |g: &str, pin: usize, f: &str| {
            let gate = self.netlist.gate(g).ok_or(ViolationKind::UnknownGate)?;
            let driver = gate.inputs.get(pin).ok_or(ViolationKind::PinOutOfRange)?;
            if driver != f {
                return Err(ViolationKind::DriverMismatch);
            }
            Ok((self.index[g], pin))
        };
        let slot_i = slot(&gene.g_i, gene.pin_i, &gene.f_i)?;
        let slot_j = slot(&gene.g_j, gene.pin_j, &gene.f_j)?;
        if gene.f_i == gene.f_j {
            return Err(ViolationKind::SameDriver);
        }
        if slot_i == slot_j {
            return Err(ViolationKind::SameSlot);
        }
        Ok(Resolved {
            f_i: self.index[gene.f_i.as_str()],
            f_j: self.index[gene.f_j.as_str()],
            slot_i,
            slot_j,
        })
    }

    /// Used slots and cross edges of genes that resolve; the genes are
    /// assumed jointly valid.
    fn occupancy(&self, accepted: &[Gene]) -> (HashSet<Pin>, Vec<Edge>) {
        let mut used = HashSet::new();
        let mut cross = Vec::new();
        for r in accepted.iter().filter_map(|g| self.resolve(g).ok()) {
            used.insert(r.slot_i);
            used.insert(r.slot_j);
            cross.extend(r.cross_edges());
        }
        (used, cross)
    }

    /// Rejection-samples one gene compatible with `accepted`: both slots
    /// free, distinct drivers, and no cycle once its cross connections are
    /// added. Gives up after `budget` attempts.
    pub fn sample_gene<R: Rng + ?Sized>(
        &self,
        accepted: &[Gene],
        rng: &mut R,
        budget: usize,
    ) -> Result<Gene> {
        let (used, mut cross) = self.occupancy(accepted);
        let free: Vec<usize> = (0..self.slots.len())
            .filter(|&s| !used.contains(&(self.slots[s].gate, self.slots[s].pin)))
            .collect();
        if free.len() < 2 {
            return Err(LockError::Exhausted { attempts: 0 });
        }
        let base = cross.len();
        for _ in 0..budget {
            let a = rng.gen_range(0..free.len());
            let mut b = rng.gen_range(0..free.len() - 1);
            if b >= a {
                b += 1;
            }
            let (sa, sb) = (self.slots[free[a]], self.slots[free[b]]);
            if sa.driver == sb.driver {
                continue;
            }
            cross.truncate(base);
            cross.extend([(sb.driver, sa.gate), (sa.driver, sb.gate)]);
            if !self.acyclic_with(&cross) {
                continue;
            }
            return Ok(Gene {
                f_i: self.names[sa.driver].to_string(),
                g_i: self.names[sa.gate].to_string(),
                pin_i: sa.pin,
                f_j: self.names[sb.driver].to_string(),
                g_j: self.names[sb.gate].to_string(),
                pin_j: sb.pin,
                k: rng.gen_bool(0.5),
            });
        }
        Err(LockError::Exhausted { attempts: budget })
    }

    pub fn sample_random_genotype<R: Rng + ?Sized>(
        &self,
        key_length: usize,
        rng: &mut R,
    ) -> Result<Genotype> {
        if key_length == 0 {
            return Err(LockError::EmptyKey);
        }
        let budget = RETRIES_PER_KEY_BIT * key_length;
        let mut genes = Vec::with_capacity(key_length);
        for _ in 0..key_length {
            let gene = self.sample_gene(&genes, rng, budget)?;
            genes.push(gene);
        }
        Ok(Genotype::new(self.netlist.name(), genes))
    }

    /// Checks each gene in index order against the original netlist and the
    /// genes accepted before it. Violating genes are reported and excluded
    /// from the context of later genes.
    pub fn validate(&self, genotype: &Genotype) -> ValidityReport {
        let mut report = ValidityReport {
            empty: genotype.genes.is_empty(),
            violations: Vec::new(),
        };
        let mut used = HashSet::new();
        let mut cross = Vec::new();
        for (b, gene) in genotype.genes.iter().enumerate() {
            let r = match self.resolve(gene) {
                Ok(r) => r,
                Err(kind) => {
                    report.violations.push(Violation { gene: b, kind });
                    continue;
                }
            };
            if used.contains(&r.slot_i) || used.contains(&r.slot_j) {
                report.violations.push(Violation {
                    gene: b,
                    kind: ViolationKind::SlotConflict,
                });
                continue;
            }
            cross.extend(r.cross_edges());
            if !self.acyclic_with(&cross) {
                cross.truncate(cross.len() - 2);
                report.violations.push(Violation {
                    gene: b,
                    kind: ViolationKind::Cycle,
                });
                continue;
            }
            used.insert(r.slot_i);
            used.insert(r.slot_j);
        }
        report
    }

    /// Replaces every violating gene, in ascending index order, with a fresh
    /// sample. Valid genes are left untouched.
    pub fn repair<R: Rng + ?Sized>(&self, genotype: &Genotype, rng: &mut R) -> Result<Genotype> {
        let report = self.validate(genotype);
        if report.empty {
            return Err(LockError::EmptyKey);
        }
        let mut pending = report.violating_genes();
        let mut genes = genotype.genes.clone();
        let budget = RETRIES_PER_KEY_BIT * genes.len();
        while let Some(b) = pending.pop_first() {
            let accepted: Vec<Gene> = genes
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != b && !pending.contains(i))
                .map(|(_, g)| g.clone())
                .collect();
            genes[b] = self.sample_gene(&accepted, rng, budget)?;
        }
        Ok(Genotype::new(genotype.origin.clone(), genes))
    }

    /// Inserts the MUX pair of every gene. Gene `b` adds `mux_<b>_0` feeding
    /// `(g_i, pin_i)` and `mux_<b>_1` feeding `(g_j, pin_j)`, both selected by
    /// `keyinput<b>`.
    pub fn apply(&self, genotype: &Genotype) -> Result<LockedNetlist> {
        let report = self.validate(genotype);
        if report.empty {
            return Err(LockError::EmptyKey);
        }
        if !report.is_valid() {
            return Err(LockError::Invalid(report));
        }
        let n = self.netlist;
        let mut gates: IndexMap<String, Gate> = n.gates().clone();
        let mut muxes = Vec::with_capacity(2 * genotype.genes.len());
        let mut keys = Vec::with_capacity(genotype.genes.len());
        for (b, gene) in genotype.genes.iter().enumerate() {
            let key = key_input_name(b);
            let ((x, y), (u, v)) = gene.mux_data();
            for (side, (g, pin), (d0, d1)) in [
                (0, (&gene.g_i, gene.pin_i), (x, y)),
                (1, (&gene.g_j, gene.pin_j), (u, v)),
            ] {
                let name = format!("mux_{b}_{side}");
                if n.contains(&name) {
                    return Err(LockError::NameCollision(name));
                }
                gates.get_mut(g.as_str()).expect("validated").inputs[pin] = name.clone();
                let inputs = vec![key.clone(), d0.to_string(), d1.to_string()];
                muxes.push((name, Gate::new(GateKind::Mux, inputs)));
            }
            keys.push(key);
        }
        gates.extend(muxes);
        let locked = Netlist::new(
            n.name(),
            n.primary_inputs().to_vec(),
            keys,
            n.primary_outputs().to_vec(),
            gates,
        )?;
        Ok(LockedNetlist {
            netlist: locked,
            correct_key: key_vector(&genotype.key_bits()),
            genotype: genotype.clone(),
            origin_name: n.name().to_string(),
        })
    }
}

/// Samples one gene compatible with `accepted`, with a retry budget of
/// `100 · (accepted.len() + 1)`.
pub fn sample_gene<R: Rng + ?Sized>(n: &Netlist, accepted: &[Gene], rng: &mut R) -> Result<Gene> {
    let budget = RETRIES_PER_KEY_BIT * (accepted.len() + 1);
    DmuxLocker::new(n)?.sample_gene(accepted, rng, budget)
}

pub fn sample_random_genotype<R: Rng + ?Sized>(
    n: &Netlist,
    key_length: usize,
    rng: &mut R,
) -> Result<Genotype> {
    DmuxLocker::new(n)?.sample_random_genotype(key_length, rng)
}

pub fn validate_genotype(n: &Netlist, g: &Genotype) -> Result<ValidityReport> {
    Ok(DmuxLocker::new(n)?.validate(g))
}

pub fn repair_genotype<R: Rng + ?Sized>(
    n: &Netlist,
    g: &Genotype,
    rng: &mut R,
) -> Result<Genotype> {
    DmuxLocker::new(n)?.repair(g, rng)
}

pub fn apply_genotype(n: &Netlist, g: &Genotype) -> Result<LockedNetlist> {
    DmuxLocker::new(n)?.apply(g)
}
