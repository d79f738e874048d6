use serde::{Deserialize, Serialize};

use super::relation::{apply_edits, pick_rng, run_transform_command, InputRelation, MetamorphicRelation, Pick};
use crate::value::{Payload, TestInput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetamorphicGroup {
    pub id: String,
    pub mr: String,
    pub sources: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick: Option<Pick>,
    #[serde(default)]
    pub followups: Vec<Payload>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeriveError {
    #[error("relation `{mr}` takes {expected} source(s), got {got}")]
    WrongArity { mr: String, expected: usize, got: usize },
    #[error("input `{input}` is not an eligible source for `{mr}`{}", detail_suffix(.detail))]
    IneligibleSource {
        mr: String,
        input: String,
        detail: Option<String>,
    },
    #[error("relation `{mr}`: transform failed: {reason}")]
    TransformFailure { mr: String, reason: String },
}

fn detail_suffix(d: &Option<String>) -> String {
    d.as_ref().map(|d| format!(" ({d})")).unwrap_or_default()
}

/// True iff `input` satisfies the relation's eligibility predicate.
pub fn is_eligible(mr: &MetamorphicRelation, input: &TestInput) -> bool {
    mr.eligibility.eval(&input.payload).unwrap_or(false)
}

/// Derives the follow-up payloads of `mr` for `sources`.
pub fn derive_followups(
    mr: &MetamorphicRelation,
    sources: &[&TestInput],
    pick: Pick,
) -> Result<Vec<Payload>, DeriveError> {
    if sources.len() != mr.arity.sources {
        return Err(DeriveError::WrongArity {
            mr: mr.id.clone(),
            expected: mr.arity.sources,
            got: sources.len(),
        });
    }
    for s in sources {
        match mr.eligibility.eval(&s.payload) {
            Ok(true) => {}
            Ok(false) => {
                return Err(DeriveError::IneligibleSource {
                    mr: mr.id.clone(),
                    input: s.id.clone(),
                    detail: None,
                })
            }
            Err(e) => {
                return Err(DeriveError::IneligibleSource {
                    mr: mr.id.clone(),
                    input: s.id.clone(),
                    detail: Some(e.to_string()),
                })
            }
        }
    }
    let failure = |reason: String| DeriveError::TransformFailure {
        mr: mr.id.clone(),
        reason,
    };
    let payloads: Vec<Payload> = sources.iter().map(|s| s.payload.clone()).collect();
    let followups = match &mr.input {
        InputRelation::Template { followups } => {
            let mut rng = pick_rng(pick);
            followups
                .iter()
                .map(|t| {
                    let src = payloads
                        .get(t.from)
                        .ok_or_else(|| format!("template reads missing source #{}", t.from))?;
                    apply_edits(src, &t.edits, &mut rng, pick)
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(failure)?
        }
        InputRelation::Hook(h) => {
            let imp = h
                .imp
                .as_ref()
                .ok_or_else(|| failure(format!("transform hook `{}` is not bound", h.name)))?;
            imp.transform(&payloads, pick).map_err(failure)?
        }
        InputRelation::Command(cmd) => run_transform_command(cmd, &payloads, pick).map_err(failure)?,
    };
    if followups.len() != mr.arity.followups {
        return Err(failure(format!(
            "produced {} follow-ups, arity requires {}",
            followups.len(),
            mr.arity.followups
        )));
    }
    Ok(followups)
}

/// Builds a group for `mr` over `sources`, recording the follow-ups.
pub fn build_mg(
    id: impl Into<String>,
    mr: &MetamorphicRelation,
    sources: &[&TestInput],
    pick: Option<Pick>,
) -> Result<MetamorphicGroup, DeriveError> {
    let followups = derive_followups(mr, sources, pick.unwrap_or_default())?;
    Ok(MetamorphicGroup {
        id: id.into(),
        mr: mr.id.clone(),
        sources: sources.iter().map(|s| s.id.clone()).collect(),
        pick,
        followups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::Condition;
    use crate::model::relation::{Edit, OutputRelation};
    use crate::value::{payload, Value};

    fn input(id: &str, angle: f64, flag: &str) -> TestInput {
        TestInput::new(id, payload([("angle", Value::from(angle)), ("flag", Value::from(flag))]))
    }

    fn shift(offset: f64) -> MetamorphicRelation {
        MetamorphicRelation::template(
            "shift",
            Condition::Always,
            vec![Edit::Affine {
                field: "angle".into(),
                scale: 1.0,
                offset,
            }],
            OutputRelation::Equal { tolerance: 1e-9 },
        )
    }

    #[test]
    fn identity_template_returns_same_payload() {
        let mr = MetamorphicRelation::template(
            "id",
            Condition::Always,
            vec![],
            OutputRelation::Equal { tolerance: 0.0 },
        );
        let t = input("t", 12.5, "sine");
        let mg = build_mg("g", &mr, &[&t], None).unwrap();
        assert_eq!(mg.followups, vec![t.payload.clone()]);
        assert_eq!(mg.sources, vec!["t".to_owned()]);
    }

    #[test]
    fn ineligible_source_is_rejected() {
        let mut mr = shift(360.0);
        mr.eligibility = Condition::eq("flag", "sine");
        let t = input("t3", 100.0, "cosine");
        let err = derive_followups(&mr, &[&t], Pick::default()).unwrap_err();
        assert!(matches!(err, DeriveError::IneligibleSource { .. }));
    }

    #[test]
    fn arity_is_checked() {
        let mr = shift(1.0);
        let a = input("a", 1.0, "sine");
        let b = input("b", 2.0, "sine");
        assert!(matches!(
            derive_followups(&mr, &[&a, &b], Pick::default()),
            Err(DeriveError::WrongArity { .. })
        ));
    }

    #[test]
    fn unbound_hook_is_a_transform_failure() {
        let mut mr = shift(0.0);
        mr.input = InputRelation::Hook(crate::model::relation::HookRef {
            name: "missing".into(),
            imp: None,
        });
        let t = input("t", 1.0, "sine");
        assert!(matches!(
            derive_followups(&mr, &[&t], Pick::default()),
            Err(DeriveError::TransformFailure { .. })
        ));
    }
}
