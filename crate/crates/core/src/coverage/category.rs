use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{CoverageError, CoverageKind, CoverageMap, TestRequirement};
use crate::condition::{Condition, ConditionError};
use crate::exec::Exec;
use crate::value::{is_plain_id, TestInput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub name: String,
    /// Membership predicate over input payloads. O-choices may leave it out.
    #[serde(default = "always")]
    pub when: Condition,
}

fn always() -> Condition {
    Condition::Always
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub name: String,
    pub choices: Vec<Choice>,
}

/// A complete test frame: one I-choice per applicable I-category and one
/// O-choice per applicable O-category, keyed by category name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFrame {
    pub id: String,
    pub inputs: IndexMap<String, String>,
    #[serde(default)]
    pub outputs: IndexMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryChoiceSpec {
    #[serde(default)]
    pub i_categories: Vec<Category>,
    #[serde(default)]
    pub o_categories: Vec<Category>,
    #[serde(default)]
    pub frames: Vec<TestFrame>,
}

fn invalid(msg: impl Into<String>) -> CoverageError {
    CoverageError::InvalidSpec(msg.into())
}

fn check_categories(kind: &str, cats: &[Category]) -> Result<(), CoverageError> {
    let mut names = BTreeSet::new();
    for c in cats {
        if !is_plain_id(&c.name) || c.name.contains("__") {
            return Err(invalid(format!("{kind} category name `{}` is not a plain id", c.name)));
        }
        if !names.insert(&c.name) {
            return Err(invalid(format!("duplicate {kind} category `{}`", c.name)));
        }
        let mut choices = BTreeSet::new();
        for ch in &c.choices {
            if !is_plain_id(&ch.name) || ch.name.contains("__") {
                return Err(invalid(format!("choice name `{}` is not a plain id", ch.name)));
            }
            if !choices.insert(&ch.name) {
                return Err(invalid(format!("duplicate choice `{}` in category `{}`", ch.name, c.name)));
            }
            ch.when.validate().map_err(|e| invalid(e.to_string()))?;
        }
    }
    Ok(())
}

fn choice_index(cats: &[Category], cat: &str, choice: &str) -> Option<(usize, usize)> {
    let ci = cats.iter().position(|c| c.name == cat)?;
    let hi = cats[ci].choices.iter().position(|h| h.name == choice)?;
    Some((ci, hi))
}

impl CategoryChoiceSpec {
    pub fn validate(&self) -> Result<(), CoverageError> {
        check_categories("I", &self.i_categories)?;
        check_categories("O", &self.o_categories)?;
        let mut ids = BTreeSet::new();
        for f in &self.frames {
            if !is_plain_id(&f.id) {
                return Err(invalid(format!("frame id `{}` is not a plain id", f.id)));
            }
            if !ids.insert(&f.id) {
                return Err(invalid(format!("duplicate frame `{}`", f.id)));
            }
            if f.inputs.is_empty() {
                return Err(invalid(format!("frame `{}` has no I-choices", f.id)));
            }
            for (cat, ch) in &f.inputs {
                choice_index(&self.i_categories, cat, ch)
                    .ok_or_else(|| invalid(format!("frame `{}` references unknown I-choice {cat}.{ch}", f.id)))?;
            }
            for (cat, ch) in &f.outputs {
                choice_index(&self.o_categories, cat, ch)
                    .ok_or_else(|| invalid(format!("frame `{}` references unknown O-choice {cat}.{ch}", f.id)))?;
            }
        }
        Ok(())
    }

    /// I-choices of a frame as sorted (category index, choice index) pairs.
    fn frame_choices(&self, f: &TestFrame) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = f
            .inputs
            .iter()
            .filter_map(|(c, h)| choice_index(&self.i_categories, c, h))
            .collect();
        v.sort_unstable();
        v
    }

    fn choice_id(&self, (c, h): (usize, usize)) -> String {
        let cat = &self.i_categories[c];
        format!("{}.{}", cat.name, cat.choices[h].name)
    }
}

/// What a requirement asks of an input, in category/choice indices.
#[derive(Debug, Clone)]
enum Need {
    Choices(Vec<(usize, usize)>),
}

fn requirements_with_needs(
    spec: &CategoryChoiceSpec,
    kind: CoverageKind,
) -> Result<Vec<(TestRequirement, Need)>, CoverageError> {
    spec.validate()?;
    let mut out = Vec::new();
    match kind {
        CoverageKind::IChoice => {
            for (c, cat) in spec.i_categories.iter().enumerate() {
                for h in 0..cat.choices.len() {
                    let id = spec.choice_id((c, h));
                    out.push((
                        TestRequirement {
                            id: id.clone(),
                            kind,
                            descriptor: id,
                        },
                        Need::Choices(vec![(c, h)]),
                    ));
                }
            }
        }
        CoverageKind::IChoicePair => {
            let mut pairs = BTreeSet::new();
            for f in &spec.frames {
                let choices = spec.frame_choices(f);
                for (i, a) in choices.iter().enumerate() {
                    for b in &choices[i + 1..] {
                        if a.0 != b.0 {
                            pairs.insert((*a, *b));
                        }
                    }
                }
            }
            for (a, b) in pairs {
                let (ia, ib) = (spec.choice_id(a), spec.choice_id(b));
                out.push((
                    TestRequirement {
                        id: format!("{ia}__{ib}"),
                        kind,
                        descriptor: format!("{ia} & {ib}"),
                    },
                    Need::Choices(vec![a, b]),
                ));
            }
        }
        CoverageKind::IoCtf => {
            for f in &spec.frames {
                let choices = spec.frame_choices(f);
                let descriptor = choices
                    .iter()
                    .map(|&c| spec.choice_id(c))
                    .collect::<Vec<_>>()
                    .join(" & ");
                out.push((
                    TestRequirement {
                        id: f.id.clone(),
                        kind,
                        descriptor,
                    },
                    Need::Choices(choices),
                ));
            }
        }
        CoverageKind::Statement | CoverageKind::Branch => {
            return Err(CoverageError::UnsupportedCriterion(kind))
        }
    }
    Ok(out)
}

/// The requirement set of a black-box criterion.
pub fn enumerate_requirements(
    spec: &CategoryChoiceSpec,
    kind: CoverageKind,
) -> Result<Vec<TestRequirement>, CoverageError> {
    Ok(requirements_with_needs(spec, kind)?.into_iter().map(|(r, _)| r).collect())
}

/// Index of the matching choice per I-category (`None` when no choice matches).
fn classify(spec: &CategoryChoiceSpec, input: &TestInput) -> Result<Vec<Option<usize>>, CoverageError> {
    spec.i_categories
        .iter()
        .map(|cat| {
            let mut matched = Vec::new();
            for (h, ch) in cat.choices.iter().enumerate() {
                let hit = ch.when.eval(&input.payload).map_err(|e| match e {
                    ConditionError::MissingField(field) => CoverageError::MissingField {
                        input: input.id.clone(),
                        field,
                    },
                    other => CoverageError::Predicate {
                        input: input.id.clone(),
                        reason: other.to_string(),
                    },
                })?;
                if hit {
                    matched.push(h);
                }
            }
            match matched.as_slice() {
                [] => Ok(None),
                [h] => Ok(Some(*h)),
                _ => Err(CoverageError::AmbiguousChoice {
                    input: input.id.clone(),
                    category: cat.name.clone(),
                    choices: matched.iter().map(|&h| cat.choices[h].name.clone()).collect(),
                }),
            }
        })
        .collect()
}

pub fn build_coverage_map(
    spec: &CategoryChoiceSpec,
    kind: CoverageKind,
    inputs: &[TestInput],
) -> Result<CoverageMap, CoverageError> {
    build_coverage_map_with(spec, kind, inputs, Exec::default())
}

/// Evaluates every input against every requirement of `kind`.
pub fn build_coverage_map_with(
    spec: &CategoryChoiceSpec,
    kind: CoverageKind,
    inputs: &[TestInput],
    exec: Exec,
) -> Result<CoverageMap, CoverageError> {
    let reqs = requirements_with_needs(spec, kind)?;
    let rows = exec.map(inputs, |t| -> Result<Vec<bool>, CoverageError> {
        let class = classify(spec, t)?;
        Ok(reqs
            .iter()
            .map(|(_, Need::Choices(need))| need.iter().all(|&(c, h)| class[c] == Some(h)))
            .collect())
    });
    let mut cells = Vec::with_capacity(inputs.len() * reqs.len());
    for row in rows {
        cells.extend(row?);
    }
    Ok(CoverageMap::new(
        kind,
        inputs.iter().map(|t| t.id.clone()).collect(),
        reqs.into_iter().map(|(r, _)| r).collect(),
        cells,
    ))
}
