use std::collections::{BTreeMap, BTreeSet};

use super::association::{build_association, AssociationRelation};
use super::group::{derive_followups, MetamorphicGroup};
use super::relation::MetamorphicRelation;
use crate::value::TestInput;

/// Source inputs, MRs and the groups built from them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TestSuite {
    pub inputs: Vec<TestInput>,
    pub mrs: Vec<MetamorphicRelation>,
    pub mgs: Vec<MetamorphicGroup>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SuiteError {
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("group `{mg}` references unknown MR `{mr}`")]
    UnknownMr { mg: String, mr: String },
    #[error("group `{mg}` references unknown input `{input}`")]
    UnknownInput { mg: String, input: String },
    #[error("source input `{0}` is not used by any group")]
    UnusedInput(String),
    #[error("MR `{0}` is not used by any group")]
    UnusedMr(String),
    #[error("group `{mg}`: {reason}")]
    BadGroup { mg: String, reason: String },
    #[error(transparent)]
    Relation(#[from] super::relation::RelationError),
}

fn check_unique<'a>(kind: &'static str, ids: impl Iterator<Item = &'a str>) -> Result<(), SuiteError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(SuiteError::DuplicateId {
                kind,
                id: id.to_owned(),
            });
        }
    }
    Ok(())
}

impl TestSuite {
    pub fn input(&self, id: &str) -> Option<&TestInput> {
        self.inputs.iter().find(|t| t.id == id)
    }

    pub fn mr(&self, id: &str) -> Option<&MetamorphicRelation> {
        self.mrs.iter().find(|m| m.id == id)
    }

    pub fn association(&self) -> AssociationRelation {
        build_association(&self.mgs)
    }

    /// Checks id uniqueness, group well-formedness (including replay of the
    /// recorded follow-ups) and that every input and MR is used.
    pub fn validate(&self) -> Result<(), SuiteError> {
        check_unique("input", self.inputs.iter().map(|t| t.id.as_str()))?;
        check_unique("MR", self.mrs.iter().map(|m| m.id.as_str()))?;
        check_unique("group", self.mgs.iter().map(|g| g.id.as_str()))?;
        for mr in &self.mrs {
            mr.validate()?;
        }
        let inputs: BTreeMap<&str, &TestInput> = self.inputs.iter().map(|t| (t.id.as_str(), t)).collect();
        let mrs: BTreeMap<&str, &MetamorphicRelation> = self.mrs.iter().map(|m| (m.id.as_str(), m)).collect();
        for mg in &self.mgs {
            let mr = mrs.get(mg.mr.as_str()).ok_or_else(|| SuiteError::UnknownMr {
                mg: mg.id.clone(),
                mr: mg.mr.clone(),
            })?;
            let sources = mg
                .sources
                .iter()
                .map(|s| {
                    inputs.get(s.as_str()).copied().ok_or_else(|| SuiteError::UnknownInput {
                        mg: mg.id.clone(),
                        input: s.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let replay = derive_followups(mr, &sources, mg.pick.unwrap_or_default()).map_err(|e| {
                SuiteError::BadGroup {
                    mg: mg.id.clone(),
                    reason: e.to_string(),
                }
            })?;
            if replay != mg.followups {
                return Err(SuiteError::BadGroup {
                    mg: mg.id.clone(),
                    reason: "recorded follow-ups differ from the input subrelation".into(),
                });
            }
        }
        let coop = self.association();
        let used_inputs = coop.inputs();
        if let Some(t) = self.inputs.iter().find(|t| !used_inputs.contains(t.id.as_str())) {
            return Err(SuiteError::UnusedInput(t.id.clone()));
        }
        let used_mrs = coop.mrs();
        if let Some(m) = self.mrs.iter().find(|m| !used_mrs.contains(m.id.as_str())) {
            return Err(SuiteError::UnusedMr(m.id.clone()));
        }
        Ok(())
    }
}
