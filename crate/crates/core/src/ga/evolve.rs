// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    best_index, crossover, mutate, tournament_select, GaConfig, GaError, Individual, Result,
};
use crate::attack::run_attack;
use crate::lock::{DmuxLocker, LockedNetlist};
use crate::netlist::Netlist;
use crate::seed::{derive_rng, derive_seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GenerationsExhausted,
    TargetReached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    /// 1-based.
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_accuracy: f64,
    pub population: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaRun {
    pub history: Vec<GenerationStats>,
    pub best: Individual,
    pub termination: Termination,
}

impl GaRun {
    /// `generation,best_fitness,mean_fitness,best_accuracy`, six decimals.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,mean_fitness,best_accuracy\n");
        for h in &self.history {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6}",
                h.generation, h.best_fitness, h.mean_fitness, h.best_accuracy
            );
        }
        out
    }

    /// Mean attack accuracy of the initial random population.
    pub fn initial_mean_accuracy(&self) -> Option<f64> {
        self.history.first().map(|h| 1.0 - h.mean_fitness)
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub run: GaRun,
    pub best_locked: LockedNetlist,
}

/// `N` random genotypes, individual `i` sampled from the stream
/// `(seed, "init", i)`.
pub fn init_population(locker: &DmuxLocker<'_>, cfg: &GaConfig) -> Result<Vec<Individual>> {
    (0..cfg.population)
        .map(|i| {
            let mut rng = derive_rng(cfg.seed, "init", &[i as u64]);
            locker
                .sample_random_genotype(cfg.key_length, &mut rng)
                .map(Individual::new)
                .map_err(|source| GaError::Lock {
                    generation: 1,
                    individual: i,
                    source,
                })
        })
        .collect()
}

/// Fitness `1 − mean accuracy` over the configured attack seeds. The attack
/// seeds depend only on the master seed, so fitness is a pure function of
/// the genotype.
pub fn evaluate(ind: &Individual, locker: &DmuxLocker<'_>, cfg: &GaConfig) -> Result<Individual> {
    let ln = locker.apply(&ind.genotype)?;
    let mut total = 0.0;
    for s in 0..cfg.attack_seeds {
        let seed = derive_seed(cfg.seed, "attack", &[s as u64]);
        let report = run_attack(&ln.netlist, ln.correct_key.bits(), &cfg.attack, seed).map_err(
            |source| GaError::Attack {
                generation: 0,
                individual: 0,
                source,
            },
        )?;
        total += report.accuracy_for(cfg.attack.accuracy_mode);
    }
    let accuracy = total / cfg.attack_seeds as f64;
    Ok(Individual {
        genotype: ind.genotype.clone(),
        fitness: 1.0 - accuracy,
        attack_accuracy: accuracy,
        evaluated: true,
    })
}

fn evaluate_all(
    pop: Vec<Individual>,
    locker: &DmuxLocker<'_>,
    cfg: &GaConfig,
    generation: usize,
) -> Result<Vec<Individual>> {
    pop.into_par_iter()
        .enumerate()
        .map(|(i, ind)| {
            if ind.evaluated {
                return Ok(ind);
            }
            evaluate(&ind, locker, cfg).map_err(|e| match e {
                GaError::Locking(source) | GaError::Lock { source, .. } => GaError::Lock {
                    generation,
                    individual: i,
                    source,
                },
                GaError::Attack { source, .. } => GaError::Attack {
                    generation,
                    individual: i,
                    source,
                },
                other => other,
            })
        })
        .collect()
}

fn breed(
    pop: &[Individual],
    locker: &DmuxLocker<'_>,
    cfg: &GaConfig,
    generation: usize,
) -> Result<Vec<Individual>> {
    let mut rng = derive_rng(cfg.seed, "breed", &[generation as u64]);
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.sort_by(|&a, &b| pop[b].fitness.total_cmp(&pop[a].fitness).then(a.cmp(&b)));
    let mut next: Vec<Individual> = order[..cfg.elites]
        .iter()
        .map(|&i| pop[i].clone())
        .collect();
    let p_m = cfg.effective_mutation_rate();
    let tag = |individual: usize| {
        move |source| GaError::Lock {
            generation,
            individual,
            source,
        }
    };
    while next.len() < cfg.population {
        let slot = next.len();
        let a = tournament_select(pop, cfg.tournament, &mut rng)?;
        let b = tournament_select(pop, cfg.tournament, &mut rng)?;
        let (c1, c2) = crossover(
            &pop[a].genotype,
            &pop[b].genotype,
            cfg.crossover_rate,
            locker,
            &mut rng,
        )
        .map_err(|e| match e {
            GaError::Locking(source) => tag(slot)(source),
            other => other,
        })?;
        for child in [c1, c2] {
            if next.len() == cfg.population {
                break;
            }
            let slot = next.len();
            let g = mutate(&child, locker, p_m, &mut rng).map_err(|e| match e {
                GaError::Locking(source) => tag(slot)(source),
                other => other,
            })?;
            next.push(Individual::new(g));
        }
    }
    Ok(next)
}

/// Runs the generational loop and materialises the best individual found.
pub fn evolve(n: &Netlist, cfg: &GaConfig) -> Result<Evolution> {
    cfg.validate()?;
    let locker = DmuxLocker::new(n)?;
    let mut pop = init_population(&locker, cfg)?;
    let mut history = Vec::new();
    let mut best: Option<Individual> = None;
    let mut termination = Termination::GenerationsExhausted;

    for generation in 1..=cfg.generations {
        if generation > 1 {
            pop = breed(&pop, &locker, cfg, generation)?;
        }
        pop = evaluate_all(pop, &locker, cfg, generation)?;
        debug_assert_eq!(pop.len(), cfg.population);

        let bi = best_index(&pop).expect("population is non-empty");
        let mean = pop.iter().map(|i| i.fitness).sum::<f64>() / pop.len() as f64;
        history.push(GenerationStats {
            generation,
            best_fitness: pop[bi].fitness,
            mean_fitness: mean,
            best_accuracy: pop[bi].attack_accuracy,
            population: pop.len(),
        });
        if best.as_ref().is_none_or(|b| pop[bi].fitness > b.fitness) {
            best = Some(pop[bi].clone());
        }
        let best_fitness = best.as_ref().map(|b| b.fitness).unwrap_or(0.0);
        if cfg.target_fitness.is_some_and(|t| best_fitness >= t) {
            termination = Termination::TargetReached;
            break;
        }
    }

    let best = best.expect("at least one generation ran");
    let best_locked = locker.apply(&best.genotype)?;
    Ok(Evolution {
        run: GaRun {
            history,
            best,
            termination,
        },
        best_locked,
    })
}
