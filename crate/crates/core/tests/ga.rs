// SPDX-License-Identifier: Apache-2.0

mod common;

use autolock::attack::run_attack;
use autolock::ga::{
    best_index, crossover, crossover_at, evaluate, evolve, init_population, mutate, mutate_counted,
    tournament_select,
};
use autolock::lock::{apply_genotype, sample_random_genotype, DmuxLocker};
use autolock::seed::{derive_seed, rng_from_seed};
use autolock::synth::{c17, random_dag, tile, DagConfig};
use autolock::{GaConfig, GaError, Genotype, Individual, Termination};

fn scored(fitness: &[f64]) -> Vec<Individual> {
    let n = tile(&c17(), 2);
    fitness
        .iter()
        .enumerate()
        .map(|(i, &f)| Individual {
            genotype: sample_random_genotype(&n, 2, &mut rng_from_seed(i as u64)).unwrap(),
            fitness: f,
            attack_accuracy: 1.0 - f,
            evaluated: true,
        })
        .collect()
}

fn small(seed: u64) -> GaConfig {
    let mut cfg = GaConfig::new(8, seed);
    cfg.population = 6;
    cfg.generations = 3;
    cfg
}

#[test]
fn tournament_picks_fitter_and_breaks_ties_low() {
    let pop = scored(&[0.1, 0.9, 0.5]);
    let mut rng = rng_from_seed(1);
    let mut hits = [0usize; 3];
    for _ in 0..3000 {
        hits[tournament_select(&pop, 2, &mut rng).unwrap()] += 1;
    }
    // P(i wins) with replacement, ranks 0..3 ascending: (2r+1)/9
    let want: [f64; 3] = [1.0 / 9.0, 5.0 / 9.0, 3.0 / 9.0];
    for i in 0..3 {
        let p = want[i];
        let sd = (3000.0 * p * (1.0 - p)).sqrt();
        assert!((hits[i] as f64 - 3000.0 * p).abs() < 4.0 * sd, "{hits:?}");
    }
    let tied = scored(&[0.5, 0.5]);
    let mut rng = rng_from_seed(2);
    let mut wins = [0usize; 2];
    for _ in 0..2000 {
        wins[tournament_select(&tied, 2, &mut rng).unwrap()] += 1;
    }
    // index 1 only wins when drawn twice: 1/4
    assert!((400..=600).contains(&wins[1]), "{wins:?}");
}

#[test]
fn tournament_errors() {
    let mut rng = rng_from_seed(0);
    assert!(matches!(
        tournament_select(&[], 2, &mut rng),
        Err(GaError::EmptyPopulation)
    ));
    let mut pop = scored(&[0.2, 0.3]);
    pop[1].evaluated = false;
    assert!(matches!(
        tournament_select(&pop, 2, &mut rng),
        Err(GaError::Unevaluated(1))
    ));
}

#[test]
fn crossover_at_swaps_tails() {
    let n = tile(&c17(), 2);
    let a = sample_random_genotype(&n, 6, &mut rng_from_seed(1)).unwrap();
    let b = sample_random_genotype(&n, 6, &mut rng_from_seed(2)).unwrap();
    for cut in 1..6 {
        let (c, d) = crossover_at(&a, &b, cut);
        assert_eq!(c.genes[..cut], a.genes[..cut]);
        assert_eq!(c.genes[cut..], b.genes[cut..]);
        assert_eq!(d.genes[..cut], b.genes[..cut]);
        assert_eq!(d.genes[cut..], a.genes[cut..]);
    }
}

#[test]
fn crossover_children_are_valid_and_mix_parents() {
    let n = random_dag("r", DagConfig::new(10, 80), &mut rng_from_seed(4));
    let locker = DmuxLocker::new(&n).unwrap();
    let mut rng = rng_from_seed(5);
    for _ in 0..100 {
        let a = locker.sample_random_genotype(8, &mut rng).unwrap();
        let b = locker.sample_random_genotype(8, &mut rng).unwrap();
        let (c, d) = crossover(&a, &b, 1.0, &locker, &mut rng).unwrap();
        for child in [&c, &d] {
            assert!(common::genotype_ok(&n, child));
            assert_eq!(child.key_length(), 8);
        }
        // the first gene never needs repair: it comes from a valid parent
        // and is checked first
        assert_eq!(c.genes[0], a.genes[0]);
        assert_eq!(d.genes[0], b.genes[0]);
    }
}

#[test]
fn crossover_without_probability_copies_parents() {
    let n = tile(&c17(), 2);
    let locker = DmuxLocker::new(&n).unwrap();
    let mut rng = rng_from_seed(6);
    let a = locker.sample_random_genotype(6, &mut rng).unwrap();
    let b = locker.sample_random_genotype(6, &mut rng).unwrap();
    assert_eq!(
        crossover(&a, &b, 0.0, &locker, &mut rng).unwrap(),
        (a.clone(), b.clone())
    );
    let one_a = Genotype::new("c17x2", a.genes[..1].to_vec());
    let one_b = Genotype::new("c17x2", b.genes[..1].to_vec());
    assert_eq!(
        crossover(&one_a, &one_b, 1.0, &locker, &mut rng).unwrap(),
        (one_a.clone(), one_b.clone())
    );
    assert!(matches!(
        crossover(&a, &one_b, 1.0, &locker, &mut rng),
        Err(GaError::LengthMismatch(6, 1))
    ));
}

#[test]
fn mutation_rate_is_binomial() {
    let n = random_dag("r", DagConfig::new(12, 120), &mut rng_from_seed(7));
    let locker = DmuxLocker::new(&n).unwrap();
    let mut rng = rng_from_seed(8);
    let g = locker.sample_random_genotype(10, &mut rng).unwrap();
    let trials = 2000;
    let mut total = 0;
    for _ in 0..trials {
        let (m, count) = mutate_counted(&g, &locker, 0.1, &mut rng).unwrap();
        assert!(common::genotype_ok(&n, &m));
        total += count;
    }
    // Binomial(10, 0.1) per call: mean 1, sd 0.9487; 3 sigma on the mean
    let mean = total as f64 / trials as f64;
    let tol = 3.0 * (10.0f64 * 0.1 * 0.9).sqrt() / (trials as f64).sqrt();
    assert!((mean - 1.0).abs() < tol, "mean {mean}");
    assert_eq!(mutate(&g, &locker, 0.0, &mut rng).unwrap(), g);
}

#[test]
fn full_mutation_changes_every_gene_somehow() {
    let n = random_dag("r", DagConfig::new(12, 120), &mut rng_from_seed(9));
    let locker = DmuxLocker::new(&n).unwrap();
    let mut rng = rng_from_seed(10);
    let g = locker.sample_random_genotype(6, &mut rng).unwrap();
    let (m, count) = mutate_counted(&g, &locker, 1.0, &mut rng).unwrap();
    assert_eq!(count, 6);
    assert!(common::genotype_ok(&n, &m));
}

#[test]
fn init_population_is_valid_and_seeded() {
    let n = tile(&c17(), 2);
    let locker = DmuxLocker::new(&n).unwrap();
    let cfg = small(3);
    let a = init_population(&locker, &cfg).unwrap();
    let b = init_population(&locker, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 6);
    assert!(a
        .iter()
        .all(|i| !i.evaluated && common::genotype_ok(&n, &i.genotype)));
    let c = init_population(&locker, &small(4)).unwrap();
    assert_ne!(a, c);
}

#[test]
fn init_population_fails_on_tiny_circuit() {
    let n = c17();
    let locker = DmuxLocker::new(&n).unwrap();
    let cfg = GaConfig::new(8, 1);
    assert!(matches!(
        init_population(&locker, &cfg),
        Err(GaError::Lock { .. })
    ));
    assert!(evolve(&n, &cfg).is_err());
}

#[test]
fn fitness_is_one_minus_mean_accuracy() {
    let n = tile(&c17(), 2);
    let locker = DmuxLocker::new(&n).unwrap();
    let mut cfg = small(11);
    cfg.attack_seeds = 3;
    let g = locker
        .sample_random_genotype(8, &mut rng_from_seed(1))
        .unwrap();
    let ind = evaluate(&Individual::new(g.clone()), &locker, &cfg).unwrap();
    let ln = apply_genotype(&n, &g).unwrap();
    let accs: Vec<f64> = (0..3)
        .map(|s| {
            run_attack(
                &ln.netlist,
                &g.key_bits(),
                &cfg.attack,
                derive_seed(11, "attack", &[s]),
            )
            .unwrap()
            .accuracy
        })
        .collect();
    let mean = accs.iter().sum::<f64>() / 3.0;
    assert!(ind.evaluated);
    assert!((ind.attack_accuracy - mean).abs() < 1e-12);
    assert!((ind.fitness - (1.0 - mean)).abs() < 1e-12);
    // pure in the genotype
    assert_eq!(evaluate(&Individual::new(g), &locker, &cfg).unwrap(), ind);
}

#[test]
fn best_index_prefers_lower_on_ties() {
    assert_eq!(best_index(&scored(&[0.2, 0.7, 0.7, 0.1])), Some(1));
    assert_eq!(best_index(&[]), None);
}

#[test]
fn config_validation() {
    let n = tile(&c17(), 2);
    let bad = [
        GaConfig {
            key_length: 0,
            ..small(1)
        },
        GaConfig {
            population: 1,
            ..small(1)
        },
        GaConfig {
            elites: 6,
            ..small(1)
        },
        GaConfig {
            generations: 0,
            ..small(1)
        },
        GaConfig {
            tournament: 0,
            ..small(1)
        },
        GaConfig {
            crossover_rate: 1.5,
            ..small(1)
        },
        GaConfig {
            mutation_rate: Some(-0.1),
            ..small(1)
        },
        GaConfig {
            target_fitness: Some(2.0),
            ..small(1)
        },
        GaConfig {
            attack_seeds: 0,
            ..small(1)
        },
    ];
    for cfg in bad {
        assert!(
            matches!(evolve(&n, &cfg), Err(GaError::Config(_))),
            "{cfg:?}"
        );
    }
    assert!((GaConfig::new(8, 0).effective_mutation_rate() - 0.125).abs() < 1e-15);
}

#[test]
fn single_generation_has_no_offspring() {
    let n = tile(&c17(), 2);
    let cfg = GaConfig {
        generations: 1,
        ..small(2)
    };
    let evo = evolve(&n, &cfg).unwrap();
    assert_eq!(evo.run.history.len(), 1);
    assert_eq!(evo.run.history[0].generation, 1);
    assert_eq!(evo.run.termination, Termination::GenerationsExhausted);
    let locker = DmuxLocker::new(&n).unwrap();
    let init = init_population(&locker, &cfg).unwrap();
    assert!(init.iter().any(|i| i.genotype == evo.run.best.genotype));
}

#[test]
fn zero_target_stops_after_first_generation() {
    let n = tile(&c17(), 2);
    let cfg = GaConfig {
        target_fitness: Some(0.0),
        generations: 10,
        ..small(2)
    };
    let evo = evolve(&n, &cfg).unwrap();
    assert_eq!(evo.run.history.len(), 1);
    assert_eq!(evo.run.termination, Termination::TargetReached);
}

#[test]
fn evolution_is_deterministic_across_thread_counts() {
    let n = tile(&c17(), 2);
    let cfg = small(42);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| evolve(&n, &cfg).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.run, b.run);
    assert_eq!(a.run.history_csv(), b.run.history_csv());
    assert_eq!(
        autolock::netlist::write_bench(&a.best_locked.netlist),
        autolock::netlist::write_bench(&b.best_locked.netlist)
    );
}

#[test]
fn elitism_keeps_best_fitness_monotone() {
    let n = random_dag("r", DagConfig::new(10, 60), &mut rng_from_seed(12));
    let cfg = GaConfig {
        generations: 6,
        ..small(13)
    };
    let evo = evolve(&n, &cfg).unwrap();
    let h = &evo.run.history;
    assert_eq!(h.len(), 6);
    for w in h.windows(2) {
        assert!(w[1].best_fitness >= w[0].best_fitness);
    }
    assert_eq!(evo.run.best.fitness, h.last().unwrap().best_fitness);
    assert!(common::genotype_ok(&n, &evo.run.best.genotype));
    assert_eq!(evo.best_locked.genotype, evo.run.best.genotype);
    let csv = evo.run.history_csv();
    assert!(csv.starts_with("generation,best_fitness,mean_fitness,best_accuracy\n1,"));
    assert_eq!(csv.lines().count(), 7);
}
