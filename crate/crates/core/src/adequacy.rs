//! The k-MR coverage criterion and its adequacy measurement.
//!
//! For each requirement `r`, `K(r)` is the best clamped association ratio
//! `min(|S_RO(t)| / k, 1)` over the inputs `t` satisfying `r` (0 if none
//! does). The adequacy degree is the mean of `K` over all requirements.
//! All arithmetic is on exact rationals.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_rational::Ratio;
use serde::Serialize;

use crate::coverage::CoverageMap;
use crate::exec::Exec;
use crate::model::{AssociationRelation, MetamorphicRelation};

/// Exact non-negative rational.
pub type Rational = Ratio<u64>;

/// How MRs are counted as distinct.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Distinctness {
    #[default]
    ById,
    /// MR id → output class label. MRs missing from the map count by id.
    ByOutputClass(BTreeMap<String, String>),
}

impl Distinctness {
    pub fn by_output_class<'a>(mrs: impl IntoIterator<Item = &'a MetamorphicRelation>) -> Self {
        Distinctness::ByOutputClass(
            mrs.into_iter()
                .map(|m| (m.id.clone(), m.class_label().to_owned()))
                .collect(),
        )
    }

    fn label<'a>(&'a self, mr: &'a str) -> &'a str {
        match self {
            Distinctness::ById => mr,
            Distinctness::ByOutputClass(classes) => classes.get(mr).map(String::as_str).unwrap_or(mr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdequacyConfig {
    pub k: u32,
    pub distinctness: Distinctness,
}

impl AdequacyConfig {
    pub fn new(k: u32) -> Self {
        AdequacyConfig {
            k,
            distinctness: Distinctness::ById,
        }
    }

    pub fn with_distinctness(mut self, d: Distinctness) -> Self {
        self.distinctness = d;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdequacyError {
    #[error("the requirement set is empty")]
    EmptyRequirementSet,
    #[error("k must be at least 1")]
    InvalidK,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RequirementScore {
    pub id: String,
    #[serde(serialize_with = "ser_ratio")]
    pub kappa: Rational,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdequacyReport {
    pub k: u32,
    #[serde(serialize_with = "ser_ratio")]
    pub degree: Rational,
    pub per_requirement: Vec<RequirementScore>,
    pub infeasible: Vec<String>,
    pub satisfied: bool,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// `S_RO(t, Coop)`, projected onto output classes in by-output-class mode.
pub fn mrs_covered_by(input: &str, coop: &AssociationRelation, mode: &Distinctness) -> BTreeSet<String> {
    coop.mrs_of(input).map(|m| mode.label(m).to_owned()).collect()
}

/// Clamps at 1.
pub fn epsilon(n: Rational) -> Rational {
    if n < Rational::from_integer(1) {
        n
    } else {
        Rational::from_integer(1)
    }
}

/// Best clamped association ratio among `sat_inputs`; 0 for an empty set.
pub fn kappa(sat_inputs: &[&str], coop: &AssociationRelation, cfg: &AdequacyConfig) -> Rational {
    best_witness(sat_inputs, coop, cfg).map(|(_, k)| k).unwrap_or_else(|| Rational::from_integer(0))
}

/// Argmax of the clamped ratio, ties broken by the smallest input id.
fn best_witness<'a>(
    sat_inputs: &[&'a str],
    coop: &AssociationRelation,
    cfg: &AdequacyConfig,
) -> Option<(&'a str, Rational)> {
    let k = u64::from(cfg.k.max(1));
    sat_inputs
        .iter()
        .map(|&t| {
            let n = mrs_covered_by(t, coop, &cfg.distinctness).len() as u64;
            (t, epsilon(Rational::new(n, k)))
        })
        .fold(None, |best: Option<(&str, Rational)>, (t, v)| match best {
            Some((bt, bv)) if bv > v || (bv == v && bt <= t) => Some((bt, bv)),
            _ => Some((t, v)),
        })
}

pub fn measure_adequacy(
    coverage: &CoverageMap,
    coop: &AssociationRelation,
    cfg: &AdequacyConfig,
) -> Result<AdequacyReport, AdequacyError> {
    measure_adequacy_with(coverage, coop, cfg, Exec::default())
}

pub fn measure_adequacy_with(
    coverage: &CoverageMap,
    coop: &AssociationRelation,
    cfg: &AdequacyConfig,
    exec: Exec,
) -> Result<AdequacyReport, AdequacyError> {
    if cfg.k == 0 {
        return Err(AdequacyError::InvalidK);
    }
    let reqs = coverage.requirements();
    if reqs.is_empty() {
        return Err(AdequacyError::EmptyRequirementSet);
    }
    let indices: Vec<usize> = (0..reqs.len()).collect();
    let per_requirement = exec.map(&indices, |&r| {
        let sat = coverage.satisfying(r);
        let best = best_witness(&sat, coop, cfg);
        RequirementScore {
            id: reqs[r].id.clone(),
            kappa: best.map(|(_, v)| v).unwrap_or_else(|| Rational::from_integer(0)),
            witness: best.map(|(t, _)| t.to_owned()),
        }
    });
    let sum = per_requirement
        .iter()
        .fold(Rational::from_integer(0), |acc, s| acc + s.kappa);
    let degree = sum / Rational::from_integer(reqs.len() as u64);
    Ok(AdequacyReport {
        k: cfg.k,
        degree,
        satisfied: degree == Rational::from_integer(1),
        infeasible: coverage.infeasible().into_iter().map(str::to_owned).collect(),
        per_requirement,
    })
}

/// Every requirement has a satisfying input associated with at least `k`
/// distinct MRs.
pub fn criterion_satisfied(
    coverage: &CoverageMap,
    coop: &AssociationRelation,
    cfg: &AdequacyConfig,
) -> Result<bool, AdequacyError> {
    if cfg.k == 0 {
        return Err(AdequacyError::InvalidK);
    }
    if coverage.requirements().is_empty() {
        return Err(AdequacyError::EmptyRequirementSet);
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in coverage.inputs() {
        counts.insert(t, mrs_covered_by(t, coop, &cfg.distinctness).len());
    }
    Ok((0..coverage.requirements().len()).all(|r| {
        coverage
            .satisfying(r)
            .iter()
            .any(|t| counts[t] >= cfg.k as usize)
    }))
}

/// `n/d` with the requirement count as denominator for a zero degree.
pub fn render_fraction(r: Rational, requirement_count: usize) -> String {
    if *r.numer() == 0 {
        format!("0/{requirement_count}")
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl AdequacyReport {
    /// Machine-readable per-requirement table, one row per requirement.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("requirement_id,kappa,witness\n");
        for s in &self.per_requirement {
            let _ = writeln!(
                out,
                "{},{},{}",
                s.id,
                s.kappa,
                s.witness.as_deref().unwrap_or("-")
            );
        }
        out
    }

    pub fn render_text(&self) -> String {
        let n = self.per_requirement.len();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "degree: {} ({:.6})",
            render_fraction(self.degree, n),
            to_f64(self.degree)
        );
        let _ = writeln!(
            out,
            "k: {}  requirements: {}  infeasible: {}  satisfied: {}",
            self.k,
            n,
            self.infeasible.len(),
            self.satisfied
        );
        for s in &self.per_requirement {
            let _ = writeln!(
                out,
                "  {:<24} K = {:<6} witness = {}",
                s.id,
                s.kappa.to_string(),
                s.witness.as_deref().unwrap_or("-")
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::CoverageKind;

    fn r(n: u64, d: u64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn epsilon_clamps() {
        assert_eq!(epsilon(r(1, 3)), r(1, 3));
        assert_eq!(epsilon(r(5, 3)), r(1, 1));
        assert_eq!(epsilon(r(0, 1)), r(0, 1));
        assert_eq!(epsilon(r(1, 1)), r(1, 1));
    }

    #[test]
    fn kappa_cases() {
        let coop = AssociationRelation::from_pairs([("a", "1"), ("a", "2"), ("a", "3"), ("a", "4"), ("b", "1")]);
        let cfg = AdequacyConfig::new(3);
        assert_eq!(kappa(&[], &coop, &cfg), r(0, 1));
        assert_eq!(kappa(&["a"], &coop, &cfg), r(1, 1));
        assert_eq!(kappa(&["b"], &coop, &cfg), r(1, 3));
        assert_eq!(kappa(&["b", "zz"], &coop, &cfg), r(1, 3));
    }

    #[test]
    fn covered_set_by_class() {
        let coop = AssociationRelation::from_pairs([("t", "A"), ("t", "B"), ("t", "C")]);
        let classes = [("A", "eq"), ("B", "eq"), ("C", "le")]
            .into_iter()
            .map(|(a, b)| (a.to_owned(), b.to_owned()))
            .collect();
        let by_class = Distinctness::ByOutputClass(classes);
        assert_eq!(mrs_covered_by("t", &coop, &Distinctness::ById).len(), 3);
        assert_eq!(mrs_covered_by("t", &coop, &by_class).len(), 2);
        assert!(mrs_covered_by("absent", &coop, &by_class).is_empty());
    }

    #[test]
    fn witness_ties_break_lexicographically() {
        let cov = CoverageMap::from_rows(CoverageKind::Branch, &["b"], &[("z", vec![true]), ("a", vec![true])]);
        let coop = AssociationRelation::from_pairs([("z", "M"), ("a", "N")]);
        let rep = measure_adequacy(&cov, &coop, &AdequacyConfig::new(2)).unwrap();
        assert_eq!(rep.per_requirement[0].witness.as_deref(), Some("a"));
        assert_eq!(rep.degree, r(1, 2));
    }

    #[test]
    fn errors() {
        let empty = CoverageMap::from_rows::<&str>(CoverageKind::Branch, &[], &[("a", vec![])]);
        let coop = AssociationRelation::new();
        assert_eq!(
            measure_adequacy(&empty, &coop, &AdequacyConfig::new(1)),
            Err(AdequacyError::EmptyRequirementSet)
        );
        assert_eq!(
            criterion_satisfied(&empty, &coop, &AdequacyConfig::new(1)),
            Err(AdequacyError::EmptyRequirementSet)
        );
        let cov = CoverageMap::from_rows(CoverageKind::Branch, &["b"], &[("a", vec![true])]);
        assert_eq!(measure_adequacy(&cov, &coop, &AdequacyConfig::new(0)), Err(AdequacyError::InvalidK));
    }

    #[test]
    fn empty_association_scores_zero() {
        let cov = CoverageMap::from_rows(CoverageKind::Statement, &["s1", "s2"], &[("a", vec![true, true])]);
        let rep = measure_adequacy(&cov, &AssociationRelation::new(), &AdequacyConfig::new(2)).unwrap();
        assert_eq!(rep.degree, r(0, 1));
        assert!(rep.render_text().starts_with("degree: 0/2 "));
    }

    #[test]
    fn csv_rows() {
        let cov = CoverageMap::from_rows(CoverageKind::Statement, &["s1", "s2"], &[("a", vec![true, false])]);
        let coop = AssociationRelation::from_pairs([("a", "M")]);
        let rep = measure_adequacy(&cov, &coop, &AdequacyConfig::new(3)).unwrap();
        assert_eq!(rep.to_csv(), "requirement_id,kappa,witness\ns1,1/3,a\ns2,0,-\n");
    }
}
