//! Test requirements and the source-input satisfaction map.
//!
//! Black-box requirements (I-choice, I-choice-pair, IO-CTF) are computed
//! from a category-choice specification. White-box requirements
//! (statements, branches) are ingested from exported coverage matrices.

mod category;
mod matrix;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use category::{build_coverage_map, build_coverage_map_with, enumerate_requirements, Category, CategoryChoiceSpec, Choice, TestFrame};
pub use matrix::{ingest_coverage_matrix, parse_coverage_matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageKind {
    IChoice,
    IChoicePair,
    IoCtf,
    Statement,
    Branch,
}

impl CoverageKind {
    pub fn is_black_box(self) -> bool {
        matches!(self, CoverageKind::IChoice | CoverageKind::IChoicePair | CoverageKind::IoCtf)
    }
}

impl fmt::Display for CoverageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoverageKind::IChoice => "i-choice",
            CoverageKind::IChoicePair => "i-choice-pair",
            CoverageKind::IoCtf => "io-ctf",
            CoverageKind::Statement => "statement",
            CoverageKind::Branch => "branch",
        })
    }
}

impl std::str::FromStr for CoverageKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "i-choice" => CoverageKind::IChoice,
            "i-choice-pair" => CoverageKind::IChoicePair,
            "io-ctf" => CoverageKind::IoCtf,
            "statement" => CoverageKind::Statement,
            "branch" => CoverageKind::Branch,
            other => return Err(format!("unknown coverage kind `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestRequirement {
    pub id: String,
    pub kind: CoverageKind,
    /// The covered element: a choice, a pair of choices, a frame id or a
    /// source location.
    pub descriptor: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoverageError {
    #[error("criterion {0} is not computed from a category-choice spec; ingest a coverage matrix instead")]
    UnsupportedCriterion(CoverageKind),
    #[error("invalid category-choice spec: {0}")]
    InvalidSpec(String),
    #[error("input `{input}`: missing field `{field}`")]
    MissingField { input: String, field: String },
    #[error("input `{input}` matches choices {choices:?} of category `{category}`")]
    AmbiguousChoice {
        input: String,
        category: String,
        choices: Vec<String>,
    },
    #[error("input `{input}`: {reason}")]
    Predicate { input: String, reason: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unknown input id `{0}`")]
    UnknownInputId(String),
}

/// `sat(t, r)` for every pool input and requirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMap {
    kind: CoverageKind,
    inputs: Vec<String>,
    requirements: Vec<TestRequirement>,
    /// Row-major, one row per input.
    cells: Vec<bool>,
}

impl CoverageMap {
    /// Panics if `cells` is not `inputs.len() * requirements.len()` long.
    pub fn new(kind: CoverageKind, inputs: Vec<String>, requirements: Vec<TestRequirement>, cells: Vec<bool>) -> Self {
        assert_eq!(cells.len(), inputs.len() * requirements.len(), "incomplete coverage matrix");
        CoverageMap {
            kind,
            inputs,
            requirements,
            cells,
        }
    }

    /// Builds a white-box style map from explicit rows.
    pub fn from_rows<S: AsRef<str>>(kind: CoverageKind, requirement_ids: &[S], rows: &[(&str, Vec<bool>)]) -> Self {
        let requirements = requirement_ids
            .iter()
            .map(|r| TestRequirement {
                id: r.as_ref().to_owned(),
                kind,
                descriptor: r.as_ref().to_owned(),
            })
            .collect();
        let inputs = rows.iter().map(|(t, _)| t.to_string()).collect();
        let cells = rows.iter().flat_map(|(_, r)| r.iter().copied()).collect();
        Self::new(kind, inputs, requirements, cells)
    }

    pub fn kind(&self) -> CoverageKind {
        self.kind
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn requirements(&self) -> &[TestRequirement] {
        &self.requirements
    }

    pub fn sat(&self, input: usize, requirement: usize) -> bool {
        self.cells[input * self.requirements.len() + requirement]
    }

    pub fn sat_by_id(&self, input: &str, requirement: &str) -> Option<bool> {
        let t = self.inputs.iter().position(|i| i == input)?;
        let r = self.requirements.iter().position(|q| q.id == requirement)?;
        Some(self.sat(t, r))
    }

    /// Ids of the inputs satisfying requirement `r`.
    pub fn satisfying(&self, r: usize) -> Vec<&str> {
        (0..self.inputs.len())
            .filter(|&t| self.sat(t, r))
            .map(|t| self.inputs[t].as_str())
            .collect()
    }

    /// Requirement indices satisfied by input `t`.
    pub fn satisfied_by(&self, t: usize) -> Vec<usize> {
        (0..self.requirements.len()).filter(|&r| self.sat(t, r)).collect()
    }

    /// Requirements no input satisfies.
    pub fn infeasible(&self) -> Vec<&str> {
        (0..self.requirements.len())
            .filter(|&r| (0..self.inputs.len()).all(|t| !self.sat(t, r)))
            .map(|r| self.requirements[r].id.as_str())
            .collect()
    }

    /// Restricts the rows to the given inputs, keeping every requirement.
    /// Ids not present in the map are ignored.
    pub fn restrict_inputs<S: AsRef<str>>(&self, keep: &[S]) -> CoverageMap {
        let rows: Vec<usize> = self
            .inputs
            .iter()
            .enumerate()
            .filter(|(_, id)| keep.iter().any(|k| k.as_ref() == id.as_str()))
            .map(|(i, _)| i)
            .collect();
        let n = self.requirements.len();
        let cells = rows
            .iter()
            .flat_map(|&t| self.cells[t * n..(t + 1) * n].iter().copied())
            .collect();
        CoverageMap {
            kind: self.kind,
            inputs: rows.iter().map(|&t| self.inputs[t].clone()).collect(),
            requirements: self.requirements.clone(),
            cells,
        }
    }

    /// Drops the listed requirements.
    pub fn without_requirements<S: AsRef<str>>(&self, drop: &[S]) -> CoverageMap {
        let cols: Vec<usize> = (0..self.requirements.len())
            .filter(|&r| !drop.iter().any(|d| d.as_ref() == self.requirements[r].id))
            .collect();
        let cells = (0..self.inputs.len())
            .flat_map(|t| cols.iter().map(move |&r| (t, r)))
            .map(|(t, r)| self.sat(t, r))
            .collect();
        CoverageMap {
            kind: self.kind,
            inputs: self.inputs.clone(),
            requirements: cols.iter().map(|&r| self.requirements[r].clone()).collect(),
            cells,
        }
    }

    /// Serializes in the coverage matrix file format.
    pub fn to_matrix_string(&self) -> String {
        let mut out = String::from("input_id");
        for r in &self.requirements {
            out.push(',');
            out.push_str(&r.id);
        }
        out.push('\n');
        for (t, id) in self.inputs.iter().enumerate() {
            out.push_str(id);
            for r in 0..self.requirements.len() {
                out.push_str(if self.sat(t, r) { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CoverageMap {
        CoverageMap::from_rows(
            CoverageKind::Statement,
            &["s1", "s2", "s3"],
            &[("a", vec![true, false, false]), ("b", vec![true, true, false])],
        )
    }

    #[test]
    fn lookups() {
        let m = small();
        assert_eq!(m.sat_by_id("b", "s2"), Some(true));
        assert_eq!(m.sat_by_id("a", "s2"), Some(false));
        assert_eq!(m.sat_by_id("z", "s2"), None);
        assert_eq!(m.satisfying(0), vec!["a", "b"]);
        assert_eq!(m.satisfied_by(1), vec![0, 1]);
        assert_eq!(m.infeasible(), vec!["s3"]);
    }

    #[test]
    fn restriction_keeps_completeness() {
        let m = small();
        let r = m.restrict_inputs(&["b"]);
        assert_eq!(r.inputs(), &["b".to_owned()]);
        assert_eq!(r.requirements().len(), 3);
        assert!(r.sat(0, 1));
        let d = m.without_requirements(&["s1"]);
        assert_eq!(d.requirements().len(), 2);
        assert!(d.sat(1, 0));
        assert!(!d.sat(0, 0));
    }

    #[test]
    fn kind_parses() {
        for k in [
            CoverageKind::IChoice,
            CoverageKind::IChoicePair,
            CoverageKind::IoCtf,
            CoverageKind::Statement,
            CoverageKind::Branch,
        ] {
            assert_eq!(k.to_string().parse::<CoverageKind>().unwrap(), k);
        }
    }
}
