//! Metamorphic relations: input subrelation templates, output predicates
//! and plugin hooks.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::condition::Condition;
use crate::process;
use crate::value::{Payload, Value};

/// Captured output of one execution after parsing: an ordered token list.
pub type Output = Vec<String>;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arity {
    pub sources: usize,
    pub followups: usize,
}

impl Default for Arity {
    fn default() -> Self {
        Arity {
            sources: 1,
            followups: 1,
        }
    }
}

/// Follow-up choice for relations whose input subrelation admits a range
/// of follow-up values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pick {
    Seed(u64),
    Value(f64),
}

impl Default for Pick {
    fn default() -> Self {
        Pick::Seed(0)
    }
}

/// One template edit applied to a copy of a source payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Edit {
    /// `field' = scale * field + offset`
    Affine { field: String, scale: f64, offset: f64 },
    Set { field: String, value: Value },
    Prefix { field: String, text: String },
    /// Cuts a text field at the `occurrence`-th (1-based) `token`.
    TruncateAt {
        field: String,
        token: String,
        occurrence: usize,
        #[serde(default)]
        keep_token: bool,
    },
    /// Picks a value inside a window of a periodic domain. With
    /// `alpha = floor((x - anchor) / period)` the window is
    /// `[alpha*period + lo, alpha*period + hi]`, or `[x, alpha*period + hi]`
    /// when `lo_from_source` is set.
    PeriodicPick {
        field: String,
        period: f64,
        #[serde(default)]
        anchor: f64,
        lo: f64,
        hi: f64,
        #[serde(default)]
        lo_from_source: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowupTemplate {
    #[serde(default)]
    pub from: usize,
    pub edits: Vec<Edit>,
}

pub trait TransformHook: Send + Sync {
    fn transform(&self, sources: &[Payload], pick: Pick) -> Result<Vec<Payload>, String>;
}

pub trait VerifyHook: Send + Sync {
    fn verify(&self, sources: &[Output], followups: &[Output]) -> Result<bool, String>;
}

/// Name of an in-process hook; the implementation is attached at load time.
#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HookRef<H: ?Sized> {
    pub name: String,
    #[serde(skip)]
    pub imp: Option<Arc<H>>,
}

impl<H: ?Sized> HookRef<H> {
    pub fn bound(name: impl Into<String>, imp: Arc<H>) -> Self {
        HookRef {
            name: name.into(),
            imp: Some(imp),
        }
    }
}

impl<H: ?Sized> Clone for HookRef<H> {
    fn clone(&self) -> Self {
        HookRef {
            name: self.name.clone(),
            imp: self.imp.clone(),
        }
    }
}

impl<H: ?Sized> fmt::Debug for HookRef<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HookRef")
            .field("name", &self.name)
            .field("bound", &self.imp.is_some())
            .finish()
    }
}

impl<H: ?Sized> PartialEq for HookRef<H> {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

/// External plugin command.
///
/// Transform protocol: stdin is `{"sources":[payload..],"pick":..}` as JSON,
/// stdout is a JSON array of follow-up payloads. Verify protocol: stdin is
/// `{"sources":[[tok..]..],"followups":[[tok..]..]}`, stdout is `true` or
/// `false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PluginCommand {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_plugin_timeout")]
    pub timeout_ms: u64,
}

fn default_plugin_timeout() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InputRelation {
    Template { followups: Vec<FollowupTemplate> },
    Hook(HookRef<dyn TransformHook>),
    Command(PluginCommand),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum OutputRelation {
    /// `p(source) = p(followup)`, numerically within tolerance or token-wise.
    Equal {
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    /// `p(source) = -p(followup)`
    Negated {
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    /// `p(source) <= p(followup)`
    LessEq {
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    /// `hi >= p(source) >= p(followup) >= lo` when bounds are given.
    GreaterEq {
        #[serde(default = "default_tolerance")]
        tolerance: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounds: Option<[f64; 2]>,
    },
    /// `p(source)^2 + p(followup)^2 = constant`
    SumOfSquares {
        constant: f64,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    /// Concatenated follow-up tokens occur inside the concatenated source tokens.
    Substring,
    /// Source and follow-up token sets coincide.
    SetEqual,
    Hook(HookRef<dyn VerifyHook>),
    Command(PluginCommand),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetamorphicRelation {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_class: Option<String>,
    #[serde(default)]
    pub arity: Arity,
    #[serde(default = "always")]
    pub eligibility: Condition,
    pub input: InputRelation,
    pub output: OutputRelation,
}

fn always() -> Condition {
    Condition::Always
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RelationError {
    #[error("relation `{0}`: arity components must be at least 1")]
    BadArity(String),
    #[error("relation `{0}`: tolerance must be non-negative")]
    NegativeTolerance(String),
    #[error("relation `{id}`: {reason}")]
    Malformed { id: String, reason: String },
}

impl MetamorphicRelation {
    /// Convenience constructor for single-source, single-follow-up template relations.
    pub fn template(
        id: impl Into<String>,
        eligibility: Condition,
        edits: Vec<Edit>,
        output: OutputRelation,
    ) -> Self {
        MetamorphicRelation {
            id: id.into(),
            output_class: None,
            arity: Arity::default(),
            eligibility,
            input: InputRelation::Template {
                followups: vec![FollowupTemplate { from: 0, edits }],
            },
            output,
        }
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.output_class = Some(class.into());
        self
    }

    /// Output class used in by-output-class distinctness; falls back to the id.
    pub fn class_label(&self) -> &str {
        self.output_class.as_deref().unwrap_or(&self.id)
    }

    pub fn validate(&self) -> Result<(), RelationError> {
        if self.arity.sources == 0 || self.arity.followups == 0 {
            return Err(RelationError::BadArity(self.id.clone()));
        }
        let tol = match &self.output {
            OutputRelation::Equal { tolerance }
            | OutputRelation::Negated { tolerance }
            | OutputRelation::LessEq { tolerance }
            | OutputRelation::GreaterEq { tolerance, .. }
            | OutputRelation::SumOfSquares { tolerance, .. } => *tolerance,
            _ => 0.0,
        };
        if tol.is_nan() || tol < 0.0 {
            return Err(RelationError::NegativeTolerance(self.id.clone()));
        }
        if let InputRelation::Template { followups } = &self.input {
            if followups.len() != self.arity.followups {
                return Err(RelationError::Malformed {
                    id: self.id.clone(),
                    reason: format!(
                        "{} follow-up templates for arity {}",
                        followups.len(),
                        self.arity.followups
                    ),
                });
            }
            if let Some(t) = followups.iter().find(|t| t.from >= self.arity.sources) {
                return Err(RelationError::Malformed {
                    id: self.id.clone(),
                    reason: format!("template reads source #{} of {}", t.from, self.arity.sources),
                });
            }
        }
        self.eligibility
            .validate()
            .map_err(|e| RelationError::Malformed {
                id: self.id.clone(),
                reason: e.to_string(),
            })
    }
}

// ---------------------------------------------------------------------------
// Input subrelation evaluation

pub(crate) fn apply_edits(
    source: &Payload,
    edits: &[Edit],
    rng: &mut ChaCha8Rng,
    pick: Pick,
) -> Result<Payload, String> {
    let mut out = source.clone();
    for edit in edits {
        apply_edit(&mut out, source, edit, rng, pick)?;
    }
    Ok(out)
}

fn numeric(p: &Payload, field: &str) -> Result<f64, String> {
    p.get(field)
        .ok_or_else(|| format!("missing field `{field}`"))?
        .as_f64()
        .ok_or_else(|| format!("field `{field}` is not numeric"))
}

fn text<'a>(p: &'a Payload, field: &str) -> Result<&'a str, String> {
    p.get(field)
        .ok_or_else(|| format!("missing field `{field}`"))?
        .as_str()
        .ok_or_else(|| format!("field `{field}` is not text"))
}

/// Keeps integers integral when the arithmetic allows it.
fn numeric_like(original: &Value, x: f64) -> Value {
    match original {
        Value::Int(_) if x.fract() == 0.0 && x.abs() < 9.0e15 => Value::Int(x as i64),
        _ => Value::Dec(x),
    }
}

fn apply_edit(
    out: &mut Payload,
    source: &Payload,
    edit: &Edit,
    rng: &mut ChaCha8Rng,
    pick: Pick,
) -> Result<(), String> {
    match edit {
        Edit::Affine {
            field,
            scale,
            offset,
        } => {
            let x = numeric(out, field)?;
            let v = numeric_like(&out[field.as_str()], scale * x + offset);
            out.insert(field.clone(), v);
        }
        Edit::Set { field, value } => {
            if !out.contains_key(field) {
                return Err(format!("missing field `{field}`"));
            }
            out.insert(field.clone(), value.clone());
        }
        Edit::Prefix { field, text: prefix } => {
            let t = format!("{prefix}{}", text(out, field)?);
            out.insert(field.clone(), Value::Text(t));
        }
        Edit::TruncateAt {
            field,
            token,
            occurrence,
            keep_token,
        } => {
            if token.is_empty() || *occurrence == 0 {
                return Err("truncate-at needs a non-empty token and occurrence >= 1".into());
            }
            let t = text(out, field)?;
            let (pos, _) = t
                .match_indices(token.as_str())
                .nth(occurrence - 1)
                .ok_or_else(|| format!("`{field}` has fewer than {occurrence} `{token}`"))?;
            let end = if *keep_token { pos + token.len() } else { pos };
            let cut = t[..end].to_owned();
            out.insert(field.clone(), Value::Text(cut));
        }
        Edit::PeriodicPick {
            field,
            period,
            anchor,
            lo,
            hi,
            lo_from_source,
            step,
        } => {
            if period.is_nan() || *period <= 0.0 {
                return Err("periodic-pick needs a positive period".into());
            }
            let x = numeric(source, field)?;
            let alpha = ((x - anchor) / period).floor();
            let base = alpha * period;
            let lo_abs = if *lo_from_source { x } else { base + lo };
            let hi_abs = base + hi;
            if lo_abs > hi_abs {
                return Err(format!("empty follow-up window [{lo_abs}, {hi_abs}]"));
            }
            let chosen = match pick {
                Pick::Value(v) => {
                    if v < lo_abs || v > hi_abs {
                        return Err(format!(
                            "pinned follow-up {v} outside window [{lo_abs}, {hi_abs}]"
                        ));
                    }
                    v
                }
                Pick::Seed(_) => match step {
                    Some(s) if *s > 0.0 => {
                        let first = (lo_abs / s).ceil();
                        let last = (hi_abs / s).floor();
                        if first > last {
                            return Err(format!("no {s}-grid point in [{lo_abs}, {hi_abs}]"));
                        }
                        let n = (last - first) as u64;
                        (first + rng.random_range(0..=n) as f64) * s
                    }
                    _ => {
                        if lo_abs == hi_abs {
                            lo_abs
                        } else {
                            rng.random_range(lo_abs..=hi_abs)
                        }
                    }
                },
            };
            let v = numeric_like(&source[field.as_str()], chosen);
            out.insert(field.clone(), v);
        }
    }
    Ok(())
}

pub(crate) fn pick_rng(pick: Pick) -> ChaCha8Rng {
    match pick {
        Pick::Seed(s) => ChaCha8Rng::seed_from_u64(s),
        Pick::Value(_) => ChaCha8Rng::seed_from_u64(0),
    }
}

pub(crate) fn run_transform_command(
    cmd: &PluginCommand,
    sources: &[Payload],
    pick: Pick,
) -> Result<Vec<Payload>, String> {
    let request = serde_json::json!({ "sources": sources, "pick": pick });
    let captured = process::run(
        &cmd.program,
        &cmd.args,
        Some(&request.to_string()),
        Duration::from_millis(cmd.timeout_ms),
    )
    .map_err(|e| e.to_string())?;
    if captured.status != Some(0) {
        return Err(format!(
            "transform plugin exited with {:?}: {}",
            captured.status,
            captured.stderr.trim()
        ));
    }
    serde_json::from_str(&captured.stdout).map_err(|e| format!("transform plugin output: {e}"))
}

// ---------------------------------------------------------------------------
// Output subrelation evaluation

/// Result of evaluating an output predicate: whether it holds and a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub holds: bool,
    pub trace: String,
}

fn single_number(out: &Output, role: &str) -> Result<f64, String> {
    match out.as_slice() {
        [one] => one
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("{role} output `{one}` is not a number")),
        _ => Err(format!("{role} output has {} values, expected 1", out.len())),
    }
}

fn first<'a>(outs: &'a [Output], role: &str) -> Result<&'a Output, String> {
    outs.first().ok_or_else(|| format!("no {role} output"))
}

impl OutputRelation {
    /// Evaluates the predicate over parsed outputs. `Err` means the outputs
    /// could not be interpreted; that is never a violation.
    pub fn evaluate(&self, sources: &[Output], followups: &[Output]) -> Result<Evaluation, String> {
        let numbers = || -> Result<(f64, f64), String> {
            Ok((
                single_number(first(sources, "source")?, "source")?,
                single_number(first(followups, "follow-up")?, "follow-up")?,
            ))
        };
        let ev = |holds: bool, trace: String| Ok(Evaluation { holds, trace });
        match self {
            OutputRelation::Equal { tolerance } => {
                let (s, f) = (first(sources, "source")?, first(followups, "follow-up")?);
                match numbers() {
                    Ok((a, b)) => ev(
                        (a - b).abs() <= *tolerance,
                        format!("|{a} - {b}| <= {tolerance}"),
                    ),
                    Err(_) => ev(s == f, format!("{s:?} == {f:?}")),
                }
            }
            OutputRelation::Negated { tolerance } => {
                let (a, b) = numbers()?;
                ev(
                    (a + b).abs() <= *tolerance,
                    format!("|{a} - (-{b})| <= {tolerance}"),
                )
            }
            OutputRelation::LessEq { tolerance } => {
                let (a, b) = numbers()?;
                ev(a <= b + tolerance, format!("{a} <= {b} (tol {tolerance})"))
            }
            OutputRelation::GreaterEq { tolerance, bounds } => {
                let (a, b) = numbers()?;
                let mut holds = a + tolerance >= b;
                let mut trace = format!("{a} >= {b}");
                if let Some([lo, hi]) = bounds {
                    holds &= a <= hi + tolerance && b + tolerance >= *lo;
                    trace = format!("{hi} >= {a} >= {b} >= {lo}");
                }
                ev(holds, format!("{trace} (tol {tolerance})"))
            }
            OutputRelation::SumOfSquares {
                constant,
                tolerance,
            } => {
                let (a, b) = numbers()?;
                let sum = a * a + b * b;
                ev(
                    (sum - constant).abs() <= *tolerance,
                    format!("{a}^2 + {b}^2 = {sum} vs {constant} (tol {tolerance})"),
                )
            }
            OutputRelation::Substring => {
                let s: String = first(sources, "source")?.concat();
                let f: String = first(followups, "follow-up")?.concat();
                ev(s.contains(&f), format!("{f:?} in {s:?}"))
            }
            OutputRelation::SetEqual => {
                let s: BTreeSet<&String> = first(sources, "source")?.iter().collect();
                let f: BTreeSet<&String> = first(followups, "follow-up")?.iter().collect();
                ev(s == f, format!("{s:?} == {f:?}"))
            }
            OutputRelation::Hook(h) => {
                let imp = h
                    .imp
                    .as_ref()
                    .ok_or_else(|| format!("verify hook `{}` is not bound", h.name))?;
                let holds = imp.verify(sources, followups)?;
                ev(holds, format!("hook {}", h.name))
            }
            OutputRelation::Command(cmd) => {
                let request = serde_json::json!({ "sources": sources, "followups": followups });
                let captured = process::run(
                    &cmd.program,
                    &cmd.args,
                    Some(&request.to_string()),
                    Duration::from_millis(cmd.timeout_ms),
                )
                .map_err(|e| e.to_string())?;
                if captured.status != Some(0) {
                    return Err(format!("verify plugin exited with {:?}", captured.status));
                }
                match captured.stdout.trim() {
                    "true" => ev(true, format!("command {}", cmd.program)),
                    "false" => ev(false, format!("command {}", cmd.program)),
                    other => Err(format!("verify plugin printed `{other}`")),
                }
            }
        }
    }
}
