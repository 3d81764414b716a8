// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::{BTreeMap, HashSet};

use autolock::equiv::{check_equivalence, check_locked, corruption_rate, SAMPLED_VECTORS};
use autolock::lock::{apply_genotype, sample_random_genotype};
use autolock::netlist::parse_bench;
use autolock::seed::rng_from_seed;
use autolock::synth::{c17, random_dag, DagConfig};
use autolock::{BitVector, EquivError, EquivMode, Gene, Genotype, LockedNetlist, Netlist};

fn tiny_locked() -> LockedNetlist {
    let g = Gene {
        f_i: "a".into(),
        g_i: "n1".into(),
        pin_i: 0,
        f_j: "c".into(),
        g_j: "n2".into(),
        pin_j: 1,
        k: false,
    };
    apply_genotype(&common::tiny(), &Genotype::new("tiny", vec![g])).unwrap()
}

/// Mismatching vectors between `orig` and `ln` under `key`, by name.
fn oracle_mismatches(orig: &Netlist, ln: &Netlist, key: &[bool]) -> u64 {
    let pis = orig.primary_inputs();
    (0..1u64 << pis.len())
        .filter(|v| {
            let mut vals: BTreeMap<String, bool> = pis
                .iter()
                .enumerate()
                .map(|(i, p)| (p.clone(), v >> i & 1 == 1))
                .collect();
            let want = common::outputs_by_name(orig, &vals);
            for (i, k) in ln.key_inputs().iter().enumerate() {
                vals.insert(k.clone(), key[i]);
            }
            common::outputs_by_name(ln, &vals) != want
        })
        .count() as u64
}

#[test]
fn tiny_correct_key_is_equivalent() {
    let ln = tiny_locked();
    let r = check_locked(&common::tiny(), &ln, EquivMode::Auto, 0).unwrap();
    assert_eq!(r.mode, EquivMode::Exhaustive);
    assert_eq!(r.vectors, 8);
    assert_eq!(r.mismatches, 0);
    assert!(r.equivalent);
}

#[test]
fn tiny_flipped_key_mismatches() {
    let ln = tiny_locked();
    let key = BitVector::from_pairs([("keyinput0", true)]).unwrap();
    let r =
        check_equivalence(&common::tiny(), &ln.netlist, &key, EquivMode::Exhaustive, 0).unwrap();
    // ab + c against cb + a: they differ exactly when b = 0 and a != c
    assert_eq!(
        r.mismatches,
        oracle_mismatches(&common::tiny(), &ln.netlist, &[true])
    );
    assert_eq!(r.mismatches, 2);
    assert!(!r.equivalent);
}

#[test]
fn c17_random_lockings_are_transparent() {
    let n = c17();
    let mut rng = rng_from_seed(17);
    for _ in 0..20 {
        let g = sample_random_genotype(&n, 4, &mut rng).unwrap();
        let ln = apply_genotype(&n, &g).unwrap();
        let r = check_locked(&n, &ln, EquivMode::Auto, 0).unwrap();
        assert!(r.equivalent);
        assert_eq!(r.vectors, 32);
        let flipped: Vec<bool> = g.key_bits().iter().map(|b| !b).collect();
        let key = BitVector::new(ln.netlist.key_inputs().to_vec(), flipped.clone()).unwrap();
        let r = check_equivalence(&n, &ln.netlist, &key, EquivMode::Exhaustive, 0).unwrap();
        assert_eq!(r.mismatches, oracle_mismatches(&n, &ln.netlist, &flipped));
    }
}

#[test]
fn corruption_matches_enumeration() {
    let n = c17();
    let g = sample_random_genotype(&n, 3, &mut rng_from_seed(3)).unwrap();
    let ln = apply_genotype(&n, &g).unwrap();
    let r = corruption_rate(&n, &ln, 7, EquivMode::Auto, &mut rng_from_seed(1)).unwrap();
    assert!(r.equivalent);
    assert_eq!(r.corruption.len(), 7);
    let keys: HashSet<&str> = r.corruption.iter().map(|c| c.key.as_str()).collect();
    assert_eq!(keys.len(), 7);
    for c in &r.corruption {
        let key: Vec<bool> = c.key.chars().map(|ch| ch == '1').collect();
        assert_ne!(key, g.key_bits());
        let want = oracle_mismatches(&n, &ln.netlist, &key) as f64 / 32.0;
        assert_eq!(c.corruption, want, "key {}", c.key);
    }
}

#[test]
fn one_bit_key_has_one_wrong_key() {
    let ln = tiny_locked();
    let n = common::tiny();
    let r = corruption_rate(&n, &ln, 1, EquivMode::Auto, &mut rng_from_seed(0)).unwrap();
    assert_eq!(r.corruption.len(), 1);
    assert_eq!(r.corruption[0].key, "1");
    assert_eq!(r.corruption[0].corruption, 2.0 / 8.0);
    assert!(matches!(
        corruption_rate(&n, &ln, 10, EquivMode::Auto, &mut rng_from_seed(0)),
        Err(EquivError::TooFewWrongKeys {
            requested: 10,
            bits: 1
        })
    ));
}

#[test]
fn logically_equal_drivers_give_zero_corruption() {
    // x and y compute the same function, so swapping them is invisible.
    let n = parse_bench(
        "dup",
        "INPUT(a)\nINPUT(b)\nOUTPUT(p)\nOUTPUT(q)\nx = AND(a, b)\ny = AND(b, a)\np = NOT(x)\nq = BUFF(y)\n",
    )
    .unwrap();
    let g = Gene {
        f_i: "x".into(),
        g_i: "p".into(),
        pin_i: 0,
        f_j: "y".into(),
        g_j: "q".into(),
        pin_j: 0,
        k: true,
    };
    let ln = apply_genotype(&n, &Genotype::new("dup", vec![g])).unwrap();
    let r = corruption_rate(&n, &ln, 1, EquivMode::Auto, &mut rng_from_seed(0)).unwrap();
    assert!(r.equivalent);
    assert_eq!(r.corruption[0].corruption, 0.0);
    assert_eq!(r.mean_corruption(), 0.0);
}

#[test]
fn wide_circuits_are_sampled() {
    let n = random_dag("w", DagConfig::new(20, 80), &mut rng_from_seed(1));
    let g = sample_random_genotype(&n, 6, &mut rng_from_seed(2)).unwrap();
    let ln = apply_genotype(&n, &g).unwrap();
    let r = check_locked(&n, &ln, EquivMode::Auto, 5).unwrap();
    assert_eq!(r.mode, EquivMode::Sampled);
    assert_eq!(r.vectors, SAMPLED_VECTORS);
    assert!(r.equivalent);
    let r = check_locked(&n, &ln, EquivMode::Exhaustive, 5).unwrap();
    assert_eq!(r.vectors, 1 << 20);
    assert!(r.equivalent);
    let a = check_equivalence(
        &n,
        &ln.netlist,
        &BitVector::zeros(ln.netlist.key_inputs()),
        EquivMode::Sampled,
        9,
    )
    .unwrap();
    let b = check_equivalence(
        &n,
        &ln.netlist,
        &BitVector::zeros(ln.netlist.key_inputs()),
        EquivMode::Sampled,
        9,
    )
    .unwrap();
    assert_eq!(a, b);
}

#[test]
fn too_many_inputs_for_exhaustive() {
    let n = random_dag("w", DagConfig::new(25, 40), &mut rng_from_seed(1));
    let g = sample_random_genotype(&n, 2, &mut rng_from_seed(2)).unwrap();
    let ln = apply_genotype(&n, &g).unwrap();
    assert!(matches!(
        check_locked(&n, &ln, EquivMode::Exhaustive, 0),
        Err(EquivError::TooManyInputs(25))
    ));
}

#[test]
fn interface_mismatch_is_an_error() {
    let ln = tiny_locked();
    let other = parse_bench("o", "INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = AND(a, b)\n").unwrap();
    assert!(matches!(
        check_locked(&other, &ln, EquivMode::Auto, 0),
        Err(EquivError::Interface(_))
    ));
    assert!(matches!(
        check_locked(&ln.netlist, &ln, EquivMode::Auto, 0),
        Err(EquivError::Interface(_))
    ));
}

#[test]
fn report_json_names_the_resolved_mode() {
    let r = check_locked(&common::tiny(), &tiny_locked(), EquivMode::Auto, 0).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["mode"], "exhaustive");
    assert_eq!(v["equivalent"], true);
}
