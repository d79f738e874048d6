//! Project directories: a `project.toml` naming the suite, coverage source,
//! SUT adapters and mutant manifest.
//!
//! ```toml
//! suite = "suite.toml"
//! suts = "suts.toml"
//! sut = "trig"
//! mutants = "mutants.toml"
//! out = "out"
//!
//! [coverage]
//! kind = "statement"
//! matrix = "statement.csv"
//!
//! [adequacy]
//! k = 3
//! ```
//!
//! Relative paths resolve against the directory holding `project.toml`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::adequacy::{AdequacyConfig, Distinctness};
use crate::bundled::builtin_sut;
use crate::coverage::{build_coverage_map, parse_coverage_matrix, CategoryChoiceSpec, CoverageKind, CoverageMap};
use crate::execution::{AdapterMode, Feed, OutputParser, SutAdapter, DEFAULT_TIMEOUT};
use crate::model::{MetamorphicRelation, TestSuite};
use crate::suite_file::{ingest_pools, ingest_suite, HookRegistry};
use crate::value::TestInput;

/// Program name that stands for the running `mtadq` executable.
pub const SELF_PROGRAM: &str = "@self";

#[derive(Debug, thiserror::Error)]
pub enum ProjectError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

fn read(path: &Path) -> Result<String, ProjectError> {
    std::fs::read_to_string(path).map_err(|source| ProjectError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ProjectError> {
    toml::from_str(&read(path)?).map_err(|e| ProjectError::Parse {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DistinctnessMode {
    #[default]
    Id,
    OutputClass,
}

impl DistinctnessMode {
    pub fn resolve(self, mrs: &[MetamorphicRelation]) -> Distinctness {
        match self {
            DistinctnessMode::Id => Distinctness::ById,
            DistinctnessMode::OutputClass => Distinctness::by_output_class(mrs),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSource {
    pub kind: CoverageKind,
    #[serde(default)]
    pub matrix: Option<PathBuf>,
    #[serde(default)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdequacySection {
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default)]
    pub distinctness: DistinctnessMode,
}

fn default_k() -> u32 {
    1
}

impl Default for AdequacySection {
    fn default() -> Self {
        AdequacySection {
            k: default_k(),
            distinctness: DistinctnessMode::Id,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectFile {
    pub suite: PathBuf,
    #[serde(default)]
    pub pools: Option<PathBuf>,
    #[serde(default)]
    pub suts: Option<PathBuf>,
    #[serde(default)]
    pub sut: Option<String>,
    #[serde(default)]
    pub mutants: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub coverage: CoverageSource,
    #[serde(default)]
    pub adequacy: AdequacySection,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// One entry of the adapter definitions file. Exactly one of `builtin` and
/// `program` is set.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterDef {
    pub id: String,
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub program: Option<String>,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default)]
    pub feed: Feed,
    #[serde(default)]
    pub parser: Option<OutputParser>,
    #[serde(default)]
    pub timeout_ms: Option<u64>,
    /// Whether a builtin may run several groups at once.
    #[serde(default = "yes")]
    pub concurrent: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdapterFile {
    #[serde(default)]
    sut: Vec<AdapterDef>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MutantManifest {
    mutants: Vec<String>,
}

impl AdapterDef {
    pub fn resolve(&self, timeout: Option<Duration>) -> Result<SutAdapter, ProjectError> {
        let mut adapter = match (&self.builtin, &self.program) {
            (Some(name), None) => {
                let (imp, parser) = builtin_sut(name)
                    .ok_or_else(|| ProjectError::Invalid(format!("adapter `{}`: unknown builtin `{name}`", self.id)))?;
                SutAdapter {
                    id: self.id.clone(),
                    mode: AdapterMode::InProcess {
                        imp,
                        concurrent: self.concurrent,
                    },
                    parser,
                    timeout: DEFAULT_TIMEOUT,
                }
            }
            (None, Some(program)) => {
                let program = if program == SELF_PROGRAM {
                    std::env::current_exe()
                        .map_err(|e| ProjectError::Invalid(format!("cannot locate the running executable: {e}")))?
                        .display()
                        .to_string()
                } else {
                    program.clone()
                };
                SutAdapter::command(&self.id, program, self.args.clone(), self.feed)
            }
            _ => {
                return Err(ProjectError::Invalid(format!(
                    "adapter `{}` needs exactly one of `builtin` and `program`",
                    self.id
                )))
            }
        };
        if let Some(p) = &self.parser {
            adapter = adapter.with_parser(p.clone());
        }
        if let Some(t) = timeout.or(self.timeout_ms.map(Duration::from_millis)) {
            adapter = adapter.with_timeout(t);
        }
        Ok(adapter)
    }
}

/// A loaded project with every path resolved.
#[derive(Debug, Clone)]
pub struct Project {
    pub dir: PathBuf,
    pub file: ProjectFile,
}

impl Project {
    pub fn load(config: &Path) -> Result<Self, ProjectError> {
        let file: ProjectFile = parse_toml(config)?;
        let dir = config.parent().map(Path::to_path_buf).unwrap_or_default();
        let p = Project { dir, file };
        if p.file.coverage.matrix.is_some() == p.file.coverage.spec.is_some() {
            return Err(ProjectError::Invalid(
                "[coverage] needs exactly one of `matrix` and `spec`".into(),
            ));
        }
        if p.file.coverage.matrix.is_some() == p.file.coverage.kind.is_black_box() {
            return Err(ProjectError::Invalid(format!(
                "coverage kind {} needs a {}",
                p.file.coverage.kind,
                if p.file.coverage.kind.is_black_box() { "category-choice `spec`" } else { "`matrix`" }
            )));
        }
        Ok(p)
    }

    pub fn path(&self, rel: &Path) -> PathBuf {
        self.dir.join(rel)
    }

    pub fn out_dir(&self, overridden: Option<&Path>) -> PathBuf {
        match overridden {
            Some(o) => o.to_path_buf(),
            None => self.path(&self.file.out),
        }
    }

    pub fn suite(&self) -> Result<TestSuite, ProjectError> {
        let path = self.path(&self.file.suite);
        ingest_suite(&read(&path)?, &HookRegistry::new()).map_err(|e| ProjectError::Parse {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    /// Generation pools; the suite file's inputs and MRs unless `pools` is set.
    pub fn pools(&self) -> Result<(Vec<TestInput>, Vec<MetamorphicRelation>), ProjectError> {
        let path = self.path(self.file.pools.as_ref().unwrap_or(&self.file.suite));
        ingest_pools(&read(&path)?, &HookRegistry::new()).map_err(|e| ProjectError::Parse {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    /// Coverage over `inputs`. A matrix must have a row for each of them.
    pub fn coverage(&self, inputs: &[TestInput]) -> Result<CoverageMap, ProjectError> {
        let src = &self.file.coverage;
        if let Some(m) = &src.matrix {
            let path = self.path(m);
            let map = parse_coverage_matrix(&read(&path)?, src.kind, None).map_err(|e| ProjectError::Parse {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            if let Some(missing) = inputs.iter().find(|t| !map.inputs().contains(&t.id)) {
                return Err(ProjectError::Invalid(format!(
                    "{}: no coverage row for input `{}`",
                    path.display(),
                    missing.id
                )));
            }
            return Ok(map);
        }
        let path = self.path(src.spec.as_ref().expect("checked on load"));
        let spec: CategoryChoiceSpec = parse_toml(&path)?;
        build_coverage_map(&spec, src.kind, inputs).map_err(|e| ProjectError::Parse {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    /// Coverage over the union of the suite's and the pools' inputs.
    pub fn coverage_for(&self, suite: &TestSuite) -> Result<CoverageMap, ProjectError> {
        let mut inputs = suite.inputs.clone();
        if self.file.pools.is_some() {
            let mut seen: BTreeSet<String> = inputs.iter().map(|t| t.id.clone()).collect();
            for t in self.pools()?.0 {
                if seen.insert(t.id.clone()) {
                    inputs.push(t);
                }
            }
        }
        self.coverage(&inputs)
    }

    pub fn adequacy_config(&self, k: Option<u32>, d: Option<DistinctnessMode>, mrs: &[MetamorphicRelation]) -> AdequacyConfig {
        AdequacyConfig::new(k.unwrap_or(self.file.adequacy.k))
            .with_distinctness(d.unwrap_or(self.file.adequacy.distinctness).resolve(mrs))
    }

    fn adapter_defs(&self) -> Result<Vec<AdapterDef>, ProjectError> {
        let Some(rel) = &self.file.suts else {
            return Err(ProjectError::Invalid("the project declares no `suts` file".into()));
        };
        let file: AdapterFile = parse_toml(&self.path(rel))?;
        let mut seen = BTreeSet::new();
        if let Some(d) = file.sut.iter().find(|d| !seen.insert(d.id.as_str())) {
            return Err(ProjectError::Invalid(format!("duplicate adapter id `{}`", d.id)));
        }
        Ok(file.sut)
    }

    fn adapter(&self, defs: &[AdapterDef], id: &str, timeout: Option<Duration>) -> Result<SutAdapter, ProjectError> {
        defs.iter()
            .find(|d| d.id == id)
            .ok_or_else(|| ProjectError::Invalid(format!("no adapter named `{id}`")))?
            .resolve(timeout)
    }

    /// The adapter under test.
    pub fn original(&self, timeout: Option<Duration>) -> Result<SutAdapter, ProjectError> {
        let defs = self.adapter_defs()?;
        let id = match &self.file.sut {
            Some(id) => id.clone(),
            None => defs
                .first()
                .map(|d| d.id.clone())
                .ok_or_else(|| ProjectError::Invalid("the adapter file is empty".into()))?,
        };
        self.adapter(&defs, &id, timeout)
    }

    /// Every declared adapter, in file order.
    pub fn all_adapters(&self, timeout: Option<Duration>) -> Result<Vec<SutAdapter>, ProjectError> {
        self.adapter_defs()?.iter().map(|d| d.resolve(timeout)).collect()
    }

    /// Mutant ids from the manifest; empty when no manifest is declared.
    pub fn mutant_ids(&self) -> Result<Vec<String>, ProjectError> {
        match &self.file.mutants {
            Some(rel) => Ok(parse_toml::<MutantManifest>(&self.path(rel))?.mutants),
            None => Ok(Vec::new()),
        }
    }

    pub fn mutant_set(&self, timeout: Option<Duration>) -> Result<(SutAdapter, Vec<SutAdapter>), ProjectError> {
        let defs = self.adapter_defs()?;
        let original = self.original(timeout)?;
        let mutants = self
            .mutant_ids()?
            .iter()
            .map(|id| self.adapter(&defs, id, timeout))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((original, mutants))
    }
}

