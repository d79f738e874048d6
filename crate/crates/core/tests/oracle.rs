mod common;

use common::Instance;
use mtadq::adequacy::{criterion_satisfied, measure_adequacy, measure_adequacy_with, Rational};
use mtadq::exec::Exec;

const INSTANCES: u64 = 300;

#[test]
fn measurement_matches_brute_force() {
    for seed in 0..INSTANCES {
        let inst = Instance::seeded(seed);
        for by_class in [false, true] {
            let rep = measure_adequacy(&inst.coverage(), &inst.association(), &inst.config(by_class)).unwrap();
            let (per, degree) = inst.oracle(by_class);
            assert_eq!(rep.degree, degree, "seed {seed} by_class {by_class}");
            let got: Vec<Rational> = rep.per_requirement.iter().map(|s| s.kappa).collect();
            assert_eq!(got, per, "seed {seed} by_class {by_class}");
        }
    }
}

#[test]
fn criterion_matches_the_quantifier() {
    for seed in 0..INSTANCES {
        let inst = Instance::seeded(seed);
        for by_class in [false, true] {
            let got = criterion_satisfied(&inst.coverage(), &inst.association(), &inst.config(by_class)).unwrap();
            assert_eq!(got, inst.oracle_criterion(by_class), "seed {seed} by_class {by_class}");
        }
    }
}

#[test]
fn witnesses_attain_the_maximum() {
    for seed in 0..INSTANCES {
        let inst = Instance::seeded(seed);
        let rep = measure_adequacy(&inst.coverage(), &inst.association(), &inst.config(false)).unwrap();
        for (r, s) in rep.per_requirement.iter().enumerate() {
            match &s.witness {
                Some(w) => {
                    let t: usize = w[1..].parse().unwrap();
                    assert!(inst.sat[t][r]);
                    let n = inst.covered(t, false).min(inst.k as usize) as u64;
                    assert_eq!(Rational::new(n, inst.k as u64), s.kappa, "seed {seed}");
                }
                None => assert!((0..inst.n_inputs).all(|t| !inst.sat[t][r]), "seed {seed}"),
            }
        }
    }
}

#[test]
fn sequential_and_parallel_agree() {
    for seed in 0..50 {
        let inst = Instance::seeded(seed);
        let (cov, coop, cfg) = (inst.coverage(), inst.association(), inst.config(true));
        assert_eq!(
            measure_adequacy_with(&cov, &coop, &cfg, Exec::Sequential).unwrap(),
            measure_adequacy_with(&cov, &coop, &cfg, Exec::Parallel).unwrap()
        );
    }
}
