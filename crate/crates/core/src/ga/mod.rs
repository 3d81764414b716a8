// SPDX-License-Identifier: Apache-2.0

//! Generational genetic algorithm over locking genotypes.
//!
//! Fitness is `1 − attack accuracy`. Each generation keeps `elites`
//! individuals unchanged and fills the rest with tournament-selected,
//! crossed-over, mutated and repaired offspring.

mod evolve;
mod ops;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{AttackConfig, AttackError};
use crate::lock::{Genotype, LockError};

pub use evolve::{
    evaluate, evolve, init_population, Evolution, GaRun, GenerationStats, Termination,
};
pub use ops::{crossover, crossover_at, mutate, mutate_counted, tournament_select};

#[derive(Debug, Error)]
pub enum GaError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty population")]
    EmptyPopulation,
    #[error("individual {0} has not been evaluated")]
    Unevaluated(usize),
    #[error("parents have different key lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("generation {generation}, individual {individual}: {source}")]
    Lock {
        generation: usize,
        individual: usize,
        source: LockError,
    },
    #[error("generation {generation}, individual {individual}: {source}")]
    Attack {
        generation: usize,
        individual: usize,
        source: AttackError,
    },
    #[error(transparent)]
    Locking(#[from] LockError),
}

pub type Result<T, E = GaError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub key_length: usize,
    pub population: usize,
    pub generations: usize,
    pub tournament: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / key_length`.
    pub mutation_rate: Option<f64>,
    pub elites: usize,
    /// Stop once the best fitness reaches this value.
    pub target_fitness: Option<f64>,
    pub seed: u64,
    /// Attack runs averaged per fitness evaluation.
    pub attack_seeds: usize,
    pub attack: AttackConfig<f64>,
}

impl GaConfig {
    pub fn new(key_length: usize, seed: u64) -> GaConfig {
        GaConfig {
            key_length,
            population: 20,
            generations: 30,
            tournament: 2,
            crossover_rate: 0.9,
            mutation_rate: None,
            elites: 2,
            target_fitness: None,
            seed,
            attack_seeds: 1,
            attack: AttackConfig::default(),
        }
    }

    pub fn effective_mutation_rate(&self) -> f64 {
        self.mutation_rate
            .unwrap_or(1.0 / self.key_length.max(1) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(GaError::Config(m.to_string()));
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if self.key_length == 0 {
            return fail("key length must be at least 1");
        }
        if self.population < 2 {
            return fail("population must be at least 2");
        }
        if self.elites >= self.population {
            return fail("elite count must be below the population size");
        }
        if self.generations == 0 {
            return fail("generations must be at least 1");
        }
        if self.tournament == 0 {
            return fail("tournament size must be at least 1");
        }
        if !unit(self.crossover_rate) || !unit(self.effective_mutation_rate()) {
            return fail("probabilities must lie in [0, 1]");
        }
        if self.target_fitness.is_some_and(|f| !unit(f)) {
            return fail("target fitness must lie in [0, 1]");
        }
        if self.attack_seeds == 0 {
            return fail("at least one attack seed is required");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genotype: Genotype,
    pub fitness: f64,
    pub attack_accuracy: f64,
    pub evaluated: bool,
}

impl Individual {
    pub fn new(genotype: Genotype) -> Individual {
        Individual {
            genotype,
            fitness: 0.0,
            attack_accuracy: 0.0,
            evaluated: false,
        }
    }
}

/// Index of the fittest individual; ties go to the lower index.
pub fn best_index(pop: &[Individual]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, ind) in pop.iter().enumerate() {
        if best.is_none_or(|b| ind.fitness > pop[b].fitness) {
            best = Some(i);
        }
    }
    best
}
