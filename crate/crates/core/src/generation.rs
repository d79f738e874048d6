//! Suite generation: full satisfaction of the k-MR criterion, and greedy
//! growth into a target adequacy interval.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adequacy::{measure_adequacy, AdequacyConfig, AdequacyError, Distinctness, Rational};
use crate::coverage::CoverageMap;
use crate::exec::Exec;
use crate::model::{build_mg, is_eligible, AssociationRelation, MetamorphicGroup, MetamorphicRelation, Pick, TestSuite};
use crate::value::TestInput;

/// The interval `(lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdequacyLevel {
    lower: Rational,
    upper: Rational,
}

impl AdequacyLevel {
    pub fn new(lower: Rational, upper: Rational) -> Result<Self, GenerationError> {
        if lower < upper && upper <= Rational::from_integer(1) {
            Ok(AdequacyLevel { lower, upper })
        } else {
            Err(GenerationError::InvalidLevel(format!("({lower}, {upper}]")))
        }
    }

    /// `(i/10, (i+1)/10]` for `i` in `0..10`.
    pub fn decile(i: u64) -> Self {
        assert!(i < 10, "decile index out of range");
        AdequacyLevel {
            lower: Rational::new(i, 10),
            upper: Rational::new(i + 1, 10),
        }
    }

    pub fn lower(&self) -> Rational {
        self.lower
    }

    pub fn upper(&self) -> Rational {
        self.upper
    }

    pub fn contains(&self, degree: Rational) -> bool {
        self.lower < degree && degree <= self.upper
    }
}

impl fmt::Display for AdequacyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}]", self.lower, self.upper)
    }
}

/// Parses `lo,hi` where each bound is a decimal (`0.45`) or a fraction (`9/20`).
impl FromStr for AdequacyLevel {
    type Err = GenerationError;
    fn from_str(s: &str) -> Result<Self, GenerationError> {
        let bad = || GenerationError::InvalidLevel(s.to_owned());
        let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
        let lo = parse_rational(lo.trim()).ok_or_else(bad)?;
        let hi = parse_rational(hi.trim()).ok_or_else(bad)?;
        AdequacyLevel::new(lo, hi)
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (u64, u64) = (n.parse().ok()?, d.parse().ok()?);
        return (d != 0).then(|| Rational::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
        return None;
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let scale = 10u64.pow(frac.len() as u32);
    let frac_val: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Rational::new(int.checked_mul(scale)?.checked_add(frac_val)?, scale))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// A seeded draw among the tied candidates.
    #[default]
    Seeded,
    /// The lexicographically smallest (input id, MR id) candidate.
    Lexicographic,
}

#[derive(Debug, Clone)]
pub struct GenerationBudget {
    pub seed: u64,
    pub max_iterations: usize,
    pub pool: Vec<TestInput>,
    pub mr_pool: Vec<MetamorphicRelation>,
    pub tie_break: TieBreak,
    pub exec: Exec,
}

impl GenerationBudget {
    pub fn new(pool: Vec<TestInput>, mr_pool: Vec<MetamorphicRelation>, seed: u64) -> Self {
        GenerationBudget {
            seed,
            max_iterations: 100_000,
            pool,
            mr_pool,
            tie_break: TieBreak::Seeded,
            exec: Exec::default(),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GenerationBudget { seed, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenerationError {
    #[error("invalid adequacy level {0}")]
    InvalidLevel(String),
    #[error("the input pool or the MR pool is empty")]
    EmptyPool,
    #[error("max_iterations must be positive")]
    ZeroBudget,
    #[error("k-MR satisfaction is unachievable; blocking requirements: {}", blocking.join(", "))]
    Unachievable { blocking: Vec<String> },
    /// No suite over the pools has a degree in the level: every nonempty
    /// suite reaches at least `min` and no suite exceeds `max`.
    #[error("level {level} is infeasible: nonempty suites reach degrees in [{min}, {max}]")]
    Infeasible { level: String, min: Rational, max: Rational },
    #[error("every remaining step from degree {degree} jumps past the upper bound {upper}")]
    Overshoot { degree: Rational, upper: Rational },
    #[error("iteration budget of {0} exhausted")]
    BudgetExhausted(usize),
    #[error(transparent)]
    Adequacy(#[from] AdequacyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub suite: TestSuite,
    pub degree: Rational,
    /// Degree after each committed step.
    pub trace: Vec<Rational>,
}

/// Candidate pairs: for each pool input, the single-source MRs it is eligible
/// for and whose follow-ups can be derived.
struct Pools<'a> {
    inputs: Vec<&'a TestInput>,
    mrs: Vec<&'a MetamorphicRelation>,
    eligible: Vec<Vec<usize>>,
    /// Distinctness label of each MR, as an index into the unique labels.
    labels: Vec<usize>,
}

impl<'a> Pools<'a> {
    fn new(budget: &'a GenerationBudget, cfg: &AdequacyConfig) -> Result<Self, GenerationError> {
        if budget.pool.is_empty() || budget.mr_pool.is_empty() {
            return Err(GenerationError::EmptyPool);
        }
        if budget.max_iterations == 0 {
            return Err(GenerationError::ZeroBudget);
        }
        let mut inputs: Vec<&TestInput> = budget.pool.iter().collect();
        inputs.sort_by(|a, b| a.id.cmp(&b.id));
        let mut mrs: Vec<&MetamorphicRelation> = budget.mr_pool.iter().filter(|m| m.arity.sources == 1).collect();
        mrs.sort_by(|a, b| a.id.cmp(&b.id));
        let eligible = budget.exec.map(&inputs, |t| {
            (0..mrs.len())
                .filter(|&m| is_eligible(mrs[m], t) && build_mg("probe", mrs[m], &[*t], None).is_ok())
                .collect()
        });
        let names: Vec<&str> = mrs
            .iter()
            .map(|m| match &cfg.distinctness {
                Distinctness::ById => m.id.as_str(),
                Distinctness::ByOutputClass(map) => map.get(&m.id).map(String::as_str).unwrap_or(&m.id),
            })
            .collect();
        let labels = names
            .iter()
            .map(|n| names.iter().position(|o| o == n).unwrap_or_default())
            .collect();
        Ok(Pools {
            inputs,
            mrs,
            eligible,
            labels,
        })
    }

    fn distinct_labels(&self, t: usize) -> usize {
        self.eligible[t].iter().map(|&m| &self.labels[m]).collect::<BTreeSet<_>>().len()
    }

    fn full_association(&self) -> AssociationRelation {
        let mut coop = AssociationRelation::new();
        for (t, ms) in self.eligible.iter().enumerate() {
            for &m in ms {
                coop.insert(self.inputs[t].id.clone(), self.mrs[m].id.clone());
            }
        }
        coop
    }
}

/// Degree when every eligible (input, MR) pair of the pools is associated.
pub fn max_achievable_degree(
    coverage: &CoverageMap,
    cfg: &AdequacyConfig,
    budget: &GenerationBudget,
) -> Result<Rational, GenerationError> {
    if budget.mr_pool.is_empty() || budget.pool.is_empty() {
        measure_adequacy(coverage, &AssociationRelation::new(), cfg)?;
        return Ok(Rational::from_integer(0));
    }
    let pools = Pools::new(budget, cfg)?;
    Ok(measure_adequacy(coverage, &pools.full_association(), cfg)?.degree)
}

struct Builder<'a> {
    pools: &'a Pools<'a>,
    rng: ChaCha8Rng,
    mgs: Vec<MetamorphicGroup>,
    used_inputs: BTreeSet<usize>,
    used_mrs: BTreeSet<usize>,
}

impl<'a> Builder<'a> {
    fn new(pools: &'a Pools<'a>, seed: u64) -> Self {
        Builder {
            pools,
            rng: ChaCha8Rng::seed_from_u64(seed),
            mgs: Vec::new(),
            used_inputs: BTreeSet::new(),
            used_mrs: BTreeSet::new(),
        }
    }

    fn add(&mut self, t: usize, m: usize) {
        let (input, mr) = (self.pools.inputs[t], self.pools.mrs[m]);
        let id = format!("g{:04}", self.mgs.len() + 1);
        let seeded = Pick::Seed(self.rng.random());
        let mg = build_mg(id.clone(), mr, &[input], Some(seeded))
            .or_else(|_| build_mg(id, mr, &[input], None))
            .expect("derivation checked when the pools were built");
        self.mgs.push(mg);
        self.used_inputs.insert(t);
        self.used_mrs.insert(m);
    }

    fn finish(self) -> TestSuite {
        TestSuite {
            inputs: self.used_inputs.iter().map(|&t| self.pools.inputs[t].clone()).collect(),
            mrs: self.used_mrs.iter().map(|&m| self.pools.mrs[m].clone()).collect(),
            mgs: self.mgs,
        }
    }
}

fn pick_tie<T: Copy>(ties: &[T], tie_break: TieBreak, rng: &mut ChaCha8Rng) -> T {
    match tie_break {
        TieBreak::Lexicographic => ties[0],
        TieBreak::Seeded => ties[rng.random_range(0..ties.len())],
    }
}

fn measure_suite(coverage: &CoverageMap, suite: &TestSuite, cfg: &AdequacyConfig) -> Result<Rational, GenerationError> {
    Ok(measure_adequacy(coverage, &suite.association(), cfg)?.degree)
}

fn coverage_rows(coverage: &CoverageMap, pools: &Pools) -> Vec<Option<usize>> {
    let index: HashMap<&str, usize> = coverage
        .inputs()
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    pools.inputs.iter().map(|t| index.get(t.id.as_str()).copied()).collect()
}

/// Rule 1: a suite satisfying the k-MR criterion on every requirement some
/// pool input satisfies. Inputs are chosen by greedy set cover among inputs
/// eligible for at least k distinct MRs; each gets k of them, picked from a
/// seeded permutation.
pub fn generate_satisfying_suite(
    coverage: &CoverageMap,
    cfg: &AdequacyConfig,
    budget: &GenerationBudget,
) -> Result<Generated, GenerationError> {
    if cfg.k == 0 {
        return Err(AdequacyError::InvalidK.into());
    }
    if coverage.requirements().is_empty() {
        return Err(AdequacyError::EmptyRequirementSet.into());
    }
    let pools = Pools::new(budget, cfg)?;
    let k = cfg.k as usize;
    let rows = coverage_rows(coverage, &pools);
    let sat: Vec<Vec<usize>> = rows
        .iter()
        .map(|r| r.map(|r| coverage.satisfied_by(r)).unwrap_or_default())
        .collect();
    let capable: Vec<bool> = (0..pools.inputs.len()).map(|t| pools.distinct_labels(t) >= k).collect();

    let nreq = coverage.requirements().len();
    let mut feasible = vec![false; nreq];
    let mut reachable = vec![false; nreq];
    for (t, rs) in sat.iter().enumerate() {
        for &r in rs {
            feasible[r] = true;
            reachable[r] |= capable[t];
        }
    }
    let blocking: Vec<String> = (0..nreq)
        .filter(|&r| feasible[r] && !reachable[r])
        .map(|r| coverage.requirements()[r].id.clone())
        .collect();
    if !blocking.is_empty() {
        return Err(GenerationError::Unachievable { blocking });
    }

    let mut b = Builder::new(&pools, budget.seed);
    let mut uncovered: BTreeSet<usize> = (0..nreq).filter(|&r| feasible[r]).collect();
    let mut chosen = Vec::new();
    let mut iterations = 0;
    while !uncovered.is_empty() {
        iterations += 1;
        if iterations > budget.max_iterations {
            return Err(GenerationError::BudgetExhausted(budget.max_iterations));
        }
        let gains: Vec<usize> = (0..pools.inputs.len())
            .map(|t| {
                if capable[t] && !chosen.contains(&t) {
                    sat[t].iter().filter(|r| uncovered.contains(r)).count()
                } else {
                    0
                }
            })
            .collect();
        let best = *gains.iter().max().unwrap_or(&0);
        debug_assert!(best > 0, "reachability was checked");
        let ties: Vec<usize> = (0..gains.len()).filter(|&t| gains[t] == best).collect();
        let t = pick_tie(&ties, budget.tie_break, &mut b.rng);
        chosen.push(t);
        for r in &sat[t] {
            uncovered.remove(r);
        }
    }
    chosen.sort_unstable();
    let mut trace = Vec::new();
    for t in chosen {
        let mut order = pools.eligible[t].clone();
        if budget.tie_break == TieBreak::Seeded {
            order.shuffle(&mut b.rng);
        }
        let mut seen = BTreeSet::new();
        for m in order {
            if seen.len() == k {
                break;
            }
            if seen.insert(&pools.labels[m]) {
                b.add(t, m);
            }
        }
    }
    let suite = b.finish();
    let degree = measure_suite(coverage, &suite, cfg)?;
    trace.push(degree);
    Ok(Generated { suite, degree, trace })
}

/// Incremental integer form of the degree: `total / (k * |E|)`, where
/// `best[r] = max over satisfying inputs of min(|S_RO(t)|, k)`.
struct Growth<'a> {
    pools: &'a Pools<'a>,
    k: u64,
    sat: Vec<Vec<usize>>,
    labels: Vec<BTreeSet<usize>>,
    best: Vec<u64>,
    total: u64,
    taken: Vec<BTreeSet<usize>>,
}

impl<'a> Growth<'a> {
    fn count(&self, t: usize) -> u64 {
        self.labels[t].len() as u64
    }

    /// Candidate MRs still able to add a new label for input `t`.
    fn open(&self, t: usize) -> Vec<usize> {
        self.pools.eligible[t]
            .iter()
            .copied()
            .filter(|&m| !self.taken[t].contains(&m) && !self.labels[t].contains(&self.pools.labels[m]))
            .collect()
    }

    fn gain(&self, t: usize) -> u64 {
        let n = self.count(t);
        if n >= self.k {
            return 0;
        }
        self.sat[t].iter().filter(|&&r| self.best[r] == n).count() as u64
    }

    fn commit(&mut self, t: usize, m: usize) {
        let before = self.count(t);
        self.taken[t].insert(m);
        let label = self.pools.labels[m];
        self.labels[t].insert(label);
        let after = self.count(t).min(self.k);
        if after > before.min(self.k) {
            for &r in &self.sat[t] {
                if self.best[r] < after {
                    self.total += after - self.best[r];
                    self.best[r] = after;
                }
            }
        }
    }
}

/// Rule 2: grows a suite one association at a time, taking the step with the
/// largest degree gain among steps that do not pass `level.upper`, until the
/// degree exceeds `level.lower`.
pub fn generate_suite_in_level(
    coverage: &CoverageMap,
    cfg: &AdequacyConfig,
    level: AdequacyLevel,
    budget: &GenerationBudget,
) -> Result<Generated, GenerationError> {
    let max = max_achievable_degree(coverage, cfg, budget)?;
    let pools = Pools::new(budget, cfg)?;
    let rows = coverage_rows(coverage, &pools);
    let n = pools.inputs.len();
    let mut g = Growth {
        pools: &pools,
        k: u64::from(cfg.k),
        sat: rows
            .iter()
            .map(|r| r.map(|r| coverage.satisfied_by(r)).unwrap_or_default())
            .collect(),
        labels: vec![BTreeSet::new(); n],
        best: vec![0; coverage.requirements().len()],
        total: 0,
        taken: vec![BTreeSet::new(); n],
    };
    let denom = g.k * coverage.requirements().len() as u64;
    let degree_of = |total: u64| Rational::new(total, denom);
    // Adding associations never lowers the degree, so the cheapest single
    // association bounds every nonempty suite from below.
    let min = (0..n)
        .filter(|&t| !pools.eligible[t].is_empty())
        .map(|t| g.sat[t].len() as u64)
        .filter(|&c| c > 0)
        .min()
        .map_or(max, degree_of);
    if max <= level.lower || min > level.upper {
        return Err(GenerationError::Infeasible {
            level: level.to_string(),
            min,
            max,
        });
    }

    let mut b = Builder::new(&pools, budget.seed);
    let mut trace = Vec::new();
    let inputs: Vec<usize> = (0..n).collect();
    let mut iterations = 0;
    while degree_of(g.total) <= level.lower {
        iterations += 1;
        if iterations > budget.max_iterations {
            return Err(GenerationError::BudgetExhausted(budget.max_iterations));
        }
        let gains = budget
            .exec
            .map(&inputs, |&t| if g.open(t).is_empty() { 0 } else { g.gain(t) });
        let admissible = |t: usize| gains[t] > 0 && degree_of(g.total + gains[t]) <= level.upper;
        let Some(best) = (0..n).filter(|&t| admissible(t)).map(|t| gains[t]).max() else {
            if gains.iter().any(|&x| x > 0) {
                return Err(GenerationError::Overshoot {
                    degree: degree_of(g.total),
                    upper: level.upper,
                });
            }
            return Err(GenerationError::Infeasible {
                level: level.to_string(),
                min,
                max: degree_of(g.total),
            });
        };
        // Inputs are id-sorted and MRs id-sorted, so this list is in
        // (input id, MR id) order.
        let ties: Vec<(usize, usize)> = (0..n)
            .filter(|&t| admissible(t) && gains[t] == best)
            .flat_map(|t| g.open(t).into_iter().map(move |m| (t, m)))
            .collect();
        let (t, m) = pick_tie(&ties, budget.tie_break, &mut b.rng);
        g.commit(t, m);
        b.add(t, m);
        trace.push(degree_of(g.total));
    }
    let suite = b.finish();
    let degree = measure_suite(coverage, &suite, cfg)?;
    debug_assert_eq!(degree, degree_of(g.total));
    Ok(Generated { suite, degree, trace })
}

/// Independent replicas with seeds `base_seed + i`.
pub fn generate_replicas(
    coverage: &CoverageMap,
    cfg: &AdequacyConfig,
    level: AdequacyLevel,
    budget: &GenerationBudget,
    replicas: u64,
) -> Result<Vec<Generated>, GenerationError> {
    (0..replicas)
        .map(|i| generate_suite_in_level(coverage, cfg, level, &budget.with_seed(budget.seed.wrapping_add(i))))
        .collect()
}
