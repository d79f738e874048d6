//! The suite definition file: input pools, MR declarations and group
//! directives, in TOML.
//!
//! ```toml
//! [[inputs]]
//! id = "t1"
//! payload = { angle = 36, flag = "sine" }
//!
//! [[mrs]]
//! id = "MR1"
//! output = { op = "equal" }
//! input = { kind = "template", followups = [{ edits = [{ op = "affine", field = "angle", scale = 1.0, offset = 360.0 }] }] }
//!
//! [[groups]]
//! id = "g1"
//! mr = "MR1"
//! sources = ["t1"]
//!
//! [[groups]]
//! auto = true        # one group per eligible (input, MR) pair
//! mrs = ["MR2"]      # optional filters
//! ```
//!
//! Explicit groups may omit `followups`; they are derived on load. Export
//! always writes explicit groups with their recorded follow-ups.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{
    build_mg, is_eligible, InputRelation, MetamorphicGroup, MetamorphicRelation, OutputRelation, Pick, SuiteError,
    TestSuite, TransformHook, VerifyHook,
};
use crate::value::TestInput;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutoDirective {
    auto: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mrs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inputs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pick_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitGroup {
    id: String,
    mr: String,
    sources: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pick: Option<Pick>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    followups: Option<Vec<crate::value::Payload>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum GroupDirective {
    Auto(AutoDirective),
    Explicit(ExplicitGroup),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteFile {
    #[serde(default)]
    inputs: Vec<TestInput>,
    #[serde(default)]
    mrs: Vec<MetamorphicRelation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    groups: Vec<GroupDirective>,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("suite file: {0}")]
    Syntax(String),
    #[error("hook `{0}` is not registered")]
    UnboundHook(String),
    #[error("group directive #{index}: {reason}")]
    Directive { index: usize, reason: String },
    #[error(transparent)]
    Invalid(#[from] SuiteError),
}

/// In-process hook implementations, looked up by the names used in files.
#[derive(Default, Clone)]
pub struct HookRegistry {
    transforms: HashMap<String, Arc<dyn TransformHook>>,
    verifiers: HashMap<String, Arc<dyn VerifyHook>>,
}

impl HookRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn transform(mut self, name: impl Into<String>, hook: Arc<dyn TransformHook>) -> Self {
        self.transforms.insert(name.into(), hook);
        self
    }

    pub fn verifier(mut self, name: impl Into<String>, hook: Arc<dyn VerifyHook>) -> Self {
        self.verifiers.insert(name.into(), hook);
        self
    }

    pub fn bind(&self, mr: &mut MetamorphicRelation) -> Result<(), SuiteFileError> {
        if let InputRelation::Hook(h) = &mut mr.input {
            if h.imp.is_none() {
                h.imp = Some(
                    self.transforms
                        .get(&h.name)
                        .cloned()
                        .ok_or_else(|| SuiteFileError::UnboundHook(h.name.clone()))?,
                );
            }
        }
        if let OutputRelation::Hook(h) = &mut mr.output {
            if h.imp.is_none() {
                h.imp = Some(
                    self.verifiers
                        .get(&h.name)
                        .cloned()
                        .ok_or_else(|| SuiteFileError::UnboundHook(h.name.clone()))?,
                );
            }
        }
        Ok(())
    }
}

/// Parses and validates a suite definition, expanding `auto` directives.
pub fn ingest_suite(text: &str, hooks: &HookRegistry) -> Result<TestSuite, SuiteFileError> {
    let file: SuiteFile = toml::from_str(text).map_err(|e| SuiteFileError::Syntax(e.to_string()))?;
    let mut mrs = file.mrs;
    for mr in &mut mrs {
        hooks.bind(mr)?;
    }
    let inputs = file.inputs;
    let mut mgs = Vec::new();
    for (index, directive) in file.groups.into_iter().enumerate() {
        let fail = |reason: String| SuiteFileError::Directive { index, reason };
        match directive {
            GroupDirective::Explicit(g) => {
                let mr = mrs
                    .iter()
                    .find(|m| m.id == g.mr)
                    .ok_or_else(|| fail(format!("unknown MR `{}`", g.mr)))?;
                match g.followups {
                    Some(followups) => mgs.push(MetamorphicGroup {
                        id: g.id,
                        mr: g.mr,
                        sources: g.sources,
                        pick: g.pick,
                        followups,
                    }),
                    None => {
                        let sources = g
                            .sources
                            .iter()
                            .map(|s| {
                                inputs
                                    .iter()
                                    .find(|t| &t.id == s)
                                    .ok_or_else(|| fail(format!("unknown input `{s}`")))
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        mgs.push(build_mg(g.id, mr, &sources, g.pick).map_err(|e| fail(e.to_string()))?);
                    }
                }
            }
            GroupDirective::Auto(a) => {
                if !a.auto {
                    continue;
                }
                let pick = a.pick_seed.map(Pick::Seed);
                for mr in mrs.iter().filter(|m| a.mrs.as_ref().is_none_or(|f| f.contains(&m.id))) {
                    if mr.arity.sources != 1 {
                        return Err(fail(format!("auto expansion needs single-source MRs; `{}` has arity {}", mr.id, mr.arity.sources)));
                    }
                    for t in inputs
                        .iter()
                        .filter(|t| a.inputs.as_ref().is_none_or(|f| f.contains(&t.id)))
                        .filter(|t| is_eligible(mr, t))
                    {
                        let id = format!("{}_{}", mr.id, t.id);
                        mgs.push(build_mg(id, mr, &[t], pick).map_err(|e| fail(e.to_string()))?);
                    }
                }
            }
        }
    }
    let suite = TestSuite { inputs, mrs, mgs };
    suite.validate()?;
    Ok(suite)
}

/// Reads only the `inputs` and `mrs` of a suite file, for use as generation
/// pools. Group directives, if any, are ignored.
pub fn ingest_pools(
    text: &str,
    hooks: &HookRegistry,
) -> Result<(Vec<TestInput>, Vec<MetamorphicRelation>), SuiteFileError> {
    let file: SuiteFile = toml::from_str(text).map_err(|e| SuiteFileError::Syntax(e.to_string()))?;
    let mut mrs = file.mrs;
    for mr in &mut mrs {
        hooks.bind(mr)?;
        mr.validate().map_err(SuiteError::from)?;
    }
    for (kind, ids) in [
        ("input", file.inputs.iter().map(|t| t.id.as_str()).collect::<Vec<_>>()),
        ("MR", mrs.iter().map(|m| m.id.as_str()).collect()),
    ] {
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = ids.into_iter().find(|id| !seen.insert(*id)) {
            return Err(SuiteError::DuplicateId { kind, id: dup.to_owned() }.into());
        }
    }
    Ok((file.inputs, mrs))
}

pub fn export_pools(inputs: &[TestInput], mrs: &[MetamorphicRelation]) -> String {
    let file = SuiteFile {
        inputs: inputs.to_vec(),
        mrs: mrs.to_vec(),
        groups: Vec::new(),
    };
    toml::to_string(&file).expect("pool values are always representable in TOML")
}

pub fn read_suite(path: &Path, hooks: &HookRegistry) -> Result<TestSuite, SuiteFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| SuiteFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_suite(&text, hooks)
}

/// Serializes a suite with every group explicit and its follow-ups recorded.
pub fn export_suite(suite: &TestSuite) -> String {
    let file = SuiteFile {
        inputs: suite.inputs.clone(),
        mrs: suite.mrs.clone(),
        groups: suite
            .mgs
            .iter()
            .map(|g| {
                GroupDirective::Explicit(ExplicitGroup {
                    id: g.id.clone(),
                    mr: g.mr.clone(),
                    sources: g.sources.clone(),
                    pick: g.pick,
                    followups: Some(g.followups.clone()),
                })
            })
            .collect(),
    };
    toml::to_string(&file).expect("suite values are always representable in TOML")
}

pub fn write_suite(path: &Path, suite: &TestSuite) -> Result<(), SuiteFileError> {
    std::fs::write(path, export_suite(suite)).map_err(|source| SuiteFileError::Io {
        path: path.display().to_string(),
        source,
    })
}
