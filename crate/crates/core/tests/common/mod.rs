#![allow(dead_code)]

use std::collections::BTreeSet;

use mtadq::adequacy::{AdequacyConfig, Distinctness, Rational};
use mtadq::condition::Condition;
use mtadq::coverage::{CoverageKind, CoverageMap};
use mtadq::model::{AssociationRelation, Edit, MetamorphicRelation, OutputRelation};
use mtadq::value::{payload, TestInput, Value};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small adequacy problem in plain vectors.
#[derive(Debug, Clone)]
pub struct Instance {
    pub n_inputs: usize,
    pub n_mrs: usize,
    pub n_reqs: usize,
    /// `sat[t][r]`
    pub sat: Vec<Vec<bool>>,
    /// `coop[t][m]`
    pub coop: Vec<Vec<bool>>,
    /// Output class of each MR, for class-based distinctness.
    pub classes: Vec<u8>,
    pub k: u32,
}

pub fn input_id(t: usize) -> String {
    format!("t{t}")
}

pub fn mr_id(m: usize) -> String {
    format!("M{m}")
}

pub fn req_id(r: usize) -> String {
    format!("r{r}")
}

impl Instance {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let n_inputs = rng.random_range(1..=6);
        let n_mrs = rng.random_range(1..=6);
        let n_reqs = rng.random_range(1..=8);
        let density = rng.random_range(0.1..0.9);
        Instance {
            n_inputs,
            n_mrs,
            n_reqs,
            sat: (0..n_inputs)
                .map(|_| (0..n_reqs).map(|_| rng.random_bool(density)).collect())
                .collect(),
            coop: (0..n_inputs)
                .map(|_| (0..n_mrs).map(|_| rng.random_bool(density)).collect())
                .collect(),
            classes: (0..n_mrs).map(|_| rng.random_range(0..3)).collect(),
            k: rng.random_range(1..=4),
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Instance::random(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn coverage(&self) -> CoverageMap {
        let reqs: Vec<String> = (0..self.n_reqs).map(req_id).collect();
        let ids: Vec<String> = (0..self.n_inputs).map(input_id).collect();
        let rows: Vec<(&str, Vec<bool>)> = ids.iter().map(String::as_str).zip(self.sat.iter().cloned()).collect();
        CoverageMap::from_rows(CoverageKind::Statement, &reqs, &rows)
    }

    pub fn association(&self) -> AssociationRelation {
        let mut a = AssociationRelation::new();
        for (t, row) in self.coop.iter().enumerate() {
            for (m, &on) in row.iter().enumerate() {
                if on {
                    a.insert(input_id(t), mr_id(m));
                }
            }
        }
        a
    }

    pub fn class_distinctness(&self) -> Distinctness {
        Distinctness::ByOutputClass(
            self.classes
                .iter()
                .enumerate()
                .map(|(m, c)| (mr_id(m), format!("c{c}")))
                .collect(),
        )
    }

    pub fn config(&self, by_class: bool) -> AdequacyConfig {
        let cfg = AdequacyConfig::new(self.k);
        if by_class {
            cfg.with_distinctness(self.class_distinctness())
        } else {
            cfg
        }
    }

    /// Number of distinct MRs (or classes) associated with input `t`.
    pub fn covered(&self, t: usize, by_class: bool) -> usize {
        let labels: BTreeSet<usize> = (0..self.n_mrs)
            .filter(|&m| self.coop[t][m])
            .map(|m| if by_class { self.classes[m] as usize } else { m })
            .collect();
        labels.len()
    }

    /// Brute-force per-requirement K as (numerator, denominator) pairs
    /// reduced by hand, and the degree.
    pub fn oracle(&self, by_class: bool) -> (Vec<Rational>, Rational) {
        let k = self.k as u64;
        let mut per = Vec::new();
        let mut sum_scaled = 0u64;
        for r in 0..self.n_reqs {
            let mut best = 0u64;
            for t in 0..self.n_inputs {
                if self.sat[t][r] {
                    best = best.max((self.covered(t, by_class) as u64).min(k));
                }
            }
            sum_scaled += best;
            per.push(Rational::new(best, k));
        }
        (per, Rational::new(sum_scaled, k * self.n_reqs as u64))
    }

    /// Direct evaluation of: every requirement has a satisfying input with at
    /// least k distinct MRs.
    pub fn oracle_criterion(&self, by_class: bool) -> bool {
        (0..self.n_reqs).all(|r| {
            (0..self.n_inputs).any(|t| self.sat[t][r] && self.covered(t, by_class) >= self.k as usize)
        })
    }

    /// Pools for generation: every MR is eligible for every input.
    pub fn pools(&self) -> (Vec<TestInput>, Vec<MetamorphicRelation>) {
        let inputs = (0..self.n_inputs)
            .map(|t| TestInput::new(input_id(t), payload([("x", Value::Int(t as i64))])))
            .collect();
        let mrs = (0..self.n_mrs).map(|m| shift_mr(&mr_id(m), m as f64 + 1.0)).collect();
        (inputs, mrs)
    }
}

pub fn shift_mr(id: &str, offset: f64) -> MetamorphicRelation {
    MetamorphicRelation::template(
        id,
        Condition::Always,
        vec![Edit::Affine {
            field: "x".into(),
            scale: 1.0,
            offset,
        }],
        OutputRelation::Equal { tolerance: 1e-9 },
    )
}

pub fn instance_strategy() -> impl Strategy<Value = Instance> {
    (1usize..=6, 1usize..=6, 1usize..=8, 1u32..=4).prop_flat_map(|(n_inputs, n_mrs, n_reqs, k)| {
        (
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), n_reqs), n_inputs),
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), n_mrs), n_inputs),
            proptest::collection::vec(0u8..3, n_mrs),
        )
            .prop_map(move |(sat, coop, classes)| Instance {
                n_inputs,
                n_mrs,
                n_reqs,
                sat,
                coop,
                classes,
                k,
            })
    })
}

/// Property bodies shared by the property suite and the acceptance runner.
pub mod props {
    use super::*;
    use mtadq::adequacy::{criterion_satisfied, measure_adequacy};
    use mtadq::generation::{generate_satisfying_suite, generate_suite_in_level, AdequacyLevel, GenerationBudget, GenerationError};
    use proptest::test_runner::TestCaseError;

    type Outcome = Result<(), TestCaseError>;

    fn degree(inst: &Instance, cfg: &AdequacyConfig) -> Rational {
        measure_adequacy(&inst.coverage(), &inst.association(), cfg).unwrap().degree
    }

    pub fn degree_in_unit_interval(inst: &Instance, by_class: bool) -> Outcome {
        let d = degree(inst, &inst.config(by_class));
        prop_assert!(d >= Rational::from_integer(0) && d <= Rational::from_integer(1));
        Ok(())
    }

    pub fn full_degree_iff_criterion(inst: &Instance, by_class: bool) -> Outcome {
        let cfg = inst.config(by_class);
        let full = degree(inst, &cfg) == Rational::from_integer(1);
        prop_assert_eq!(full, criterion_satisfied(&inst.coverage(), &inst.association(), &cfg).unwrap());
        Ok(())
    }

    pub fn monotone_in_associations(inst: &Instance, t: usize, m: usize, by_class: bool) -> Outcome {
        let cfg = inst.config(by_class);
        let before = degree(inst, &cfg);
        let mut grown = inst.association();
        grown.insert(input_id(t % inst.n_inputs), mr_id(m % inst.n_mrs));
        let after = measure_adequacy(&inst.coverage(), &grown, &cfg).unwrap().degree;
        prop_assert!(after >= before);
        Ok(())
    }

    pub fn non_increasing_in_k(inst: &Instance, by_class: bool) -> Outcome {
        let mut cfg = inst.config(by_class);
        let mut last = Rational::from_integer(1);
        for k in 1..=6 {
            cfg.k = k;
            let d = degree(inst, &cfg);
            prop_assert!(d <= last, "k = {}", k);
            last = d;
        }
        Ok(())
    }

    pub fn greedy_trace_increasing(inst: &Instance, decile: u64, seed: u64) -> Outcome {
        let (pool, mrs) = inst.pools();
        let budget = GenerationBudget::new(pool, mrs, seed);
        let cfg = inst.config(false);
        let level = AdequacyLevel::decile(decile);
        match generate_suite_in_level(&inst.coverage(), &cfg, level, &budget) {
            Ok(g) => {
                prop_assert!(g.trace.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(g.trace.last().copied(), Some(g.degree));
                prop_assert!(level.contains(g.degree));
                let re = measure_adequacy(&inst.coverage(), &g.suite.association(), &cfg).unwrap().degree;
                prop_assert_eq!(re, g.degree);
            }
            Err(GenerationError::Infeasible { .. } | GenerationError::Overshoot { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
        Ok(())
    }

    pub fn deterministic_under_seed(inst: &Instance, decile: u64, seed: u64) -> Outcome {
        let cov = inst.coverage();
        let cfg = inst.config(true);
        prop_assert_eq!(
            measure_adequacy(&cov, &inst.association(), &cfg),
            measure_adequacy(&cov, &inst.association(), &cfg)
        );
        let (pool, mrs) = inst.pools();
        let budget = GenerationBudget::new(pool, mrs, seed);
        let cfg = inst.config(false);
        let level = AdequacyLevel::decile(decile);
        prop_assert_eq!(
            generate_suite_in_level(&cov, &cfg, level, &budget),
            generate_suite_in_level(&cov, &cfg, level, &budget)
        );
        prop_assert_eq!(
            generate_satisfying_suite(&cov, &cfg, &budget),
            generate_satisfying_suite(&cov, &cfg, &budget)
        );
        Ok(())
    }

    pub fn satisfying_suites_satisfy(inst: &Instance, seed: u64) -> Outcome {
        let (pool, mrs) = inst.pools();
        let budget = GenerationBudget::new(pool, mrs, seed);
        let cfg = inst.config(false);
        let cov = inst.coverage();
        match generate_satisfying_suite(&cov, &cfg, &budget) {
            Ok(g) => {
                // Requirements no pool input reaches stay at zero; every other
                // one is fully covered.
                let rep = measure_adequacy(&cov, &g.suite.association(), &cfg).unwrap();
                for (r, s) in rep.per_requirement.iter().enumerate() {
                    let feasible = (0..inst.n_inputs).any(|t| inst.sat[t][r]);
                    prop_assert_eq!(s.kappa == Rational::from_integer(1), feasible);
                }
            }
            Err(GenerationError::Unachievable { blocking }) => {
                prop_assert!(!blocking.is_empty());
                prop_assert!(inst.k as usize > inst.n_mrs);
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
        Ok(())
    }
}
