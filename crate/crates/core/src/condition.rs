//! Declarative predicates over payload fields.
//!
//! Used both for MR eligibility and for category-choice membership.

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::value::{Payload, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Condition {
    Always,
    /// Numeric comparison for numbers; `=`/`!=` also compare text.
    Cmp { field: String, cmp: CmpOp, value: Value },
    In { field: String, values: Vec<Value> },
    /// Interval on a numeric field; bounds are closed unless flagged open.
    Range {
        field: String,
        lo: f64,
        hi: f64,
        #[serde(default, skip_serializing_if = "is_false")]
        lo_open: bool,
        #[serde(default, skip_serializing_if = "is_false")]
        hi_open: bool,
    },
    /// `field mod modulus` (Euclidean) lies in the closed interval `[lo, hi]`.
    ModRange {
        field: String,
        modulus: f64,
        lo: f64,
        hi: f64,
    },
    /// Anchored regular expression over a text field.
    Matches { field: String, pattern: String },
    All { of: Vec<Condition> },
    Any { of: Vec<Condition> },
    Not { of: Box<Condition> },
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConditionError {
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("field `{field}` is not {expected}")]
    WrongType { field: String, expected: &'static str },
    #[error("invalid pattern `{pattern}`: {reason}")]
    BadPattern { pattern: String, reason: String },
}

fn field<'a>(p: &'a Payload, name: &str) -> Result<&'a Value, ConditionError> {
    p.get(name)
        .ok_or_else(|| ConditionError::MissingField(name.to_owned()))
}

fn number(p: &Payload, name: &str) -> Result<f64, ConditionError> {
    field(p, name)?
        .as_f64()
        .ok_or_else(|| ConditionError::WrongType {
            field: name.to_owned(),
            expected: "numeric",
        })
}

fn values_equal(a: &Value, b: &Value) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

impl Condition {
    pub fn eval(&self, p: &Payload) -> Result<bool, ConditionError> {
        Ok(match self {
            Condition::Always => true,
            Condition::Cmp { field: f, cmp, value } => {
                let actual = field(p, f)?;
                match cmp {
                    CmpOp::Eq => values_equal(actual, value),
                    CmpOp::Ne => !values_equal(actual, value),
                    _ => {
                        let x = number(p, f)?;
                        let y = value.as_f64().ok_or_else(|| ConditionError::WrongType {
                            field: f.clone(),
                            expected: "compared against a number",
                        })?;
                        match cmp {
                            CmpOp::Lt => x < y,
                            CmpOp::Le => x <= y,
                            CmpOp::Gt => x > y,
                            CmpOp::Ge => x >= y,
                            CmpOp::Eq | CmpOp::Ne => unreachable!(),
                        }
                    }
                }
            }
            Condition::In { field: f, values } => {
                let actual = field(p, f)?;
                values.iter().any(|v| values_equal(actual, v))
            }
            Condition::Range {
                field: f,
                lo,
                hi,
                lo_open,
                hi_open,
            } => {
                let x = number(p, f)?;
                let above = if *lo_open { x > *lo } else { x >= *lo };
                let below = if *hi_open { x < *hi } else { x <= *hi };
                above && below
            }
            Condition::ModRange {
                field: f,
                modulus,
                lo,
                hi,
            } => {
                let r = number(p, f)?.rem_euclid(*modulus);
                r >= *lo && r <= *hi
            }
            Condition::Matches { field: f, pattern } => {
                let text = field(p, f)?
                    .as_str()
                    .ok_or_else(|| ConditionError::WrongType {
                        field: f.clone(),
                        expected: "text",
                    })?;
                anchored(pattern)?.is_match(text)
            }
            Condition::All { of } => {
                for c in of {
                    if !c.eval(p)? {
                        return Ok(false);
                    }
                }
                true
            }
            Condition::Any { of } => {
                for c in of {
                    if c.eval(p)? {
                        return Ok(true);
                    }
                }
                false
            }
            Condition::Not { of } => !of.eval(p)?,
        })
    }

    /// Checks patterns compile so evaluation errors are limited to payload shape.
    pub fn validate(&self) -> Result<(), ConditionError> {
        match self {
            Condition::Matches { pattern, .. } => anchored(pattern).map(|_| ()),
            Condition::All { of } | Condition::Any { of } => of.iter().try_for_each(|c| c.validate()),
            Condition::Not { of } => of.validate(),
            _ => Ok(()),
        }
    }

    pub fn eq(field: &str, value: impl Into<Value>) -> Self {
        Condition::Cmp {
            field: field.to_owned(),
            cmp: CmpOp::Eq,
            value: value.into(),
        }
    }

    pub fn all(of: Vec<Condition>) -> Self {
        Condition::All { of }
    }
}

fn anchored(pattern: &str) -> Result<Regex, ConditionError> {
    Regex::new(&format!("^(?:{pattern})$")).map_err(|e| ConditionError::BadPattern {
        pattern: pattern.to_owned(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::payload;

    fn trig(angle: f64, flag: &str) -> Payload {
        payload([("angle", Value::from(angle)), ("flag", Value::from(flag))])
    }

    #[test]
    fn comparisons_and_membership() {
        let p = trig(36.0, "sine");
        assert!(Condition::eq("flag", "sine").eval(&p).unwrap());
        assert!(!Condition::eq("flag", "cosine").eval(&p).unwrap());
        let lt = Condition::Cmp {
            field: "angle".into(),
            cmp: CmpOp::Lt,
            value: Value::Int(40),
        };
        assert!(lt.eval(&p).unwrap());
        let inn = Condition::In {
            field: "flag".into(),
            values: vec!["cosine".into(), "sine".into()],
        };
        assert!(inn.eval(&p).unwrap());
    }

    #[test]
    fn ranges_respect_openness() {
        let p = trig(90.0, "cosine");
        let closed = Condition::Range {
            field: "angle".into(),
            lo: 0.0,
            hi: 90.0,
            lo_open: false,
            hi_open: false,
        };
        assert!(closed.eval(&p).unwrap());
        let open = Condition::Range {
            field: "angle".into(),
            lo: 0.0,
            hi: 90.0,
            lo_open: false,
            hi_open: true,
        };
        assert!(!open.eval(&p).unwrap());
    }

    #[test]
    fn mod_range_is_euclidean() {
        let window = Condition::ModRange {
            field: "angle".into(),
            modulus: 360.0,
            lo: 90.0,
            hi: 270.0,
        };
        assert!(window.eval(&trig(100.0, "cosine")).unwrap());
        assert!(window.eval(&trig(-200.0, "cosine")).unwrap());
        assert!(!window.eval(&trig(24.0, "cosine")).unwrap());
    }

    #[test]
    fn pattern_is_anchored() {
        let p = payload([("text", "\"abcd\",123")]);
        let c = Condition::Matches {
            field: "text".into(),
            pattern: "\"[a-z]*\",[0-9]+".into(),
        };
        assert!(c.eval(&p).unwrap());
        let partial = Condition::Matches {
            field: "text".into(),
            pattern: "[0-9]+".into(),
        };
        assert!(!partial.eval(&p).unwrap());
    }

    #[test]
    fn missing_field_is_an_error() {
        let err = Condition::eq("nope", 1i64).eval(&trig(1.0, "sine")).unwrap_err();
        assert_eq!(err, ConditionError::MissingField("nope".into()));
    }

    #[test]
    fn bad_pattern_fails_validation() {
        let c = Condition::Matches {
            field: "x".into(),
            pattern: "(".into(),
        };
        assert!(c.validate().is_err());
    }
}
