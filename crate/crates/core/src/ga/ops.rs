// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use super::{GaError, Individual, Result};
use crate::lock::{DmuxLocker, Genotype, RETRIES_PER_KEY_BIT};

/// Draws `t` individuals uniformly with replacement and returns the index of
/// the fittest (lower index on ties).
pub fn tournament_select<R: Rng + ?Sized>(
    pop: &[Individual],
    t: usize,
    rng: &mut R,
) -> Result<usize> {
    if pop.is_empty() {
        return Err(GaError::EmptyPopulation);
    }
    if let Some(i) = pop.iter().position(|ind| !ind.evaluated) {
        return Err(GaError::Unevaluated(i));
    }
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..t {
        let c = rng.gen_range(0..pop.len());
        if pop[c].fitness > pop[best].fitness || (pop[c].fitness == pop[best].fitness && c < best) {
            best = c;
        }
    }
    Ok(best)
}

/// One-point crossover at `cut` without repair.
pub fn crossover_at(a: &Genotype, b: &Genotype, cut: usize) -> (Genotype, Genotype) {
    let splice = |x: &Genotype, y: &Genotype| {
        let genes = x.genes[..cut]
            .iter()
            .chain(&y.genes[cut..])
            .cloned()
            .collect();
        Genotype::new(x.origin.clone(), genes)
    };
    (splice(a, b), splice(b, a))
}

/// With probability `p_c`, one-point crossover at a cut uniform in
/// `[1, K−1]`; otherwise copies of the parents. Both children are repaired.
/// `K = 1` never crosses.
pub fn crossover<R: Rng + ?Sized>(
    a: &Genotype,
    b: &Genotype,
    p_c: f64,
    locker: &DmuxLocker<'_>,
    rng: &mut R,
) -> Result<(Genotype, Genotype)> {
    let k = a.key_length();
    if k != b.key_length() {
        return Err(GaError::LengthMismatch(k, b.key_length()));
    }
    let cross = rng.gen_bool(p_c);
    let (c1, c2) = if cross && k >= 2 {
        crossover_at(a, b, rng.gen_range(1..k))
    } else {
        (a.clone(), b.clone())
    };
    Ok((locker.repair(&c1, rng)?, locker.repair(&c2, rng)?))
}

/// Mutates each gene independently with probability `p_m`: a fair coin
/// either flips its key bit or resamples its locality. Returns the repaired
/// genotype and the number of genes selected for mutation.
pub fn mutate_counted<R: Rng + ?Sized>(
    g: &Genotype,
    locker: &DmuxLocker<'_>,
    p_m: f64,
    rng: &mut R,
) -> Result<(Genotype, usize)> {
    let mut genes = g.genes.clone();
    let budget = RETRIES_PER_KEY_BIT * genes.len();
    let mut mutated = 0;
    for b in 0..genes.len() {
        if !rng.gen_bool(p_m) {
            continue;
        }
        mutated += 1;
        if rng.gen_bool(0.5) {
            genes[b].k = !genes[b].k;
        } else {
            let others: Vec<_> = genes
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != b)
                .map(|(_, x)| x.clone())
                .collect();
            genes[b] = locker.sample_gene(&others, rng, budget)?;
        }
    }
    let out = locker.repair(&Genotype::new(g.origin.clone(), genes), rng)?;
    Ok((out, mutated))
}

pub fn mutate<R: Rng + ?Sized>(
    g: &Genotype,
    locker: &DmuxLocker<'_>,
    p_m: f64,
    rng: &mut R,
) -> Result<Genotype> {
    mutate_counted(g, locker, p_m, rng).map(|(g, _)| g)
}
