use std::collections::{BTreeMap, BTreeSet};

use super::run::{run_suite, MgVerdict, RunOptions, VerdictStatus};
use super::sut::SutAdapter;
use crate::adequacy::Rational;
use crate::model::TestSuite;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("the mutant set is empty")]
    EmptyMutantSet,
    #[error("duplicate mutant id `{0}`")]
    DuplicateMutant(String),
    #[error("no suites given")]
    NoSuites,
}

#[derive(Debug, Clone)]
pub struct MutantSet {
    pub original: SutAdapter,
    mutants: Vec<SutAdapter>,
}

impl MutantSet {
    /// Mutants are identified by their adapter ids, which must be unique.
    pub fn new(original: SutAdapter, mutants: Vec<SutAdapter>) -> Result<Self, MetricsError> {
        let mut seen = BTreeSet::new();
        for m in &mutants {
            if !seen.insert(m.id.as_str()) {
                return Err(MetricsError::DuplicateMutant(m.id.clone()));
            }
        }
        Ok(MutantSet { original, mutants })
    }

    pub fn mutants(&self) -> &[SutAdapter] {
        &self.mutants
    }

    pub fn len(&self) -> usize {
        self.mutants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mutants.is_empty()
    }
}

/// Whether a verdict list reveals the fault.
pub fn detects(verdicts: &[MgVerdict], crash_detects: bool) -> bool {
    verdicts.iter().any(|v| match v.status {
        VerdictStatus::Violated => true,
        VerdictStatus::ExecutionError => crash_detects && !v.is_launch_failure(),
        VerdictStatus::Satisfied => false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FdeOutcome {
    pub fde: Rational,
    /// Mutant id → detected, in mutant-set order.
    pub detected: Vec<(String, bool)>,
    pub verdicts: BTreeMap<String, Vec<MgVerdict>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FdeOptions {
    pub run: RunOptions,
    pub crash_detects: bool,
}

pub fn fde(suite: &TestSuite, mutants: &MutantSet, opts: FdeOptions) -> Result<FdeOutcome, MetricsError> {
    if mutants.is_empty() {
        return Err(MetricsError::EmptyMutantSet);
    }
    let mut detected = Vec::with_capacity(mutants.len());
    let mut verdicts = BTreeMap::new();
    for m in mutants.mutants() {
        let v = run_suite(suite, m, opts.run);
        detected.push((m.id.clone(), detects(&v, opts.crash_detects)));
        verdicts.insert(m.id.clone(), v);
    }
    Ok(FdeOutcome {
        fde: fde_from_flags(detected.iter().map(|(_, d)| *d))?,
        detected,
        verdicts,
    })
}

/// `N_d / N_t` over per-mutant detection flags.
pub fn fde_from_flags(flags: impl IntoIterator<Item = bool>) -> Result<Rational, MetricsError> {
    let (mut nd, mut nt) = (0u64, 0u64);
    for d in flags {
        nt += 1;
        nd += u64::from(d);
    }
    if nt == 0 {
        return Err(MetricsError::EmptyMutantSet);
    }
    Ok(Rational::new(nd, nt))
}

/// Detection outcomes keyed by (suite id, mutant id).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerdictStore {
    detections: BTreeMap<(String, String), bool>,
}

impl VerdictStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, suite: impl Into<String>, mutant: impl Into<String>, detected: bool) {
        self.detections.insert((suite.into(), mutant.into()), detected);
    }

    pub fn record_verdicts(&mut self, suite: &str, mutant: &str, verdicts: &[MgVerdict], crash_detects: bool) {
        self.record(suite, mutant, detects(verdicts, crash_detects));
    }

    /// Missing entries count as not detected.
    pub fn detected(&self, suite: &str, mutant: &str) -> bool {
        self.detections
            .get(&(suite.to_owned(), mutant.to_owned()))
            .copied()
            .unwrap_or(false)
    }

    pub fn suites(&self) -> BTreeSet<&str> {
        self.detections.keys().map(|(s, _)| s.as_str()).collect()
    }

    pub fn mutants(&self) -> BTreeSet<&str> {
        self.detections.keys().map(|(_, m)| m.as_str()).collect()
    }

    /// Number of mutants the suite detects.
    pub fn detected_count(&self, suite: &str) -> usize {
        self.detections
            .iter()
            .filter(|((s, _), d)| s == suite && **d)
            .count()
    }
}

/// `q / m`: the share of `suites` that detect `mutant`.
pub fn fdr<S: AsRef<str>>(mutant: &str, suites: &[S], store: &VerdictStore) -> Result<Rational, MetricsError> {
    if suites.is_empty() {
        return Err(MetricsError::NoSuites);
    }
    let q = suites.iter().filter(|s| store.detected(s.as_ref(), mutant)).count();
    Ok(Rational::new(q as u64, suites.len() as u64))
}
