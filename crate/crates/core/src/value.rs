//! Test input payloads.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// A single payload field value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Dec(f64),
    Text(String),
    List(Vec<Value>),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Dec(d) => Some(*d),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Dec(d) => write!(f, "{d}"),
            Value::Text(s) => f.write_str(s),
            Value::List(items) => {
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Dec(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// Named fields in declaration order.
pub type Payload = IndexMap<String, Value>;

/// Builds a payload from `(name, value)` pairs.
pub fn payload<I, K, V>(fields: I) -> Payload
where
    I: IntoIterator<Item = (K, V)>,
    K: Into<String>,
    V: Into<Value>,
{
    fields
        .into_iter()
        .map(|(k, v)| (k.into(), v.into()))
        .collect()
}

/// One field per line, in declared order, newline terminated.
pub fn payload_lines(p: &Payload) -> String {
    let mut out = String::new();
    for v in p.values() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

/// Field values rendered as individual command arguments.
pub fn payload_args(p: &Payload) -> Vec<String> {
    p.values().map(|v| v.to_string()).collect()
}

/// A source test input drawn from a pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestInput {
    pub id: String,
    pub payload: Payload,
}

impl TestInput {
    pub fn new(id: impl Into<String>, payload: Payload) -> Self {
        TestInput {
            id: id.into(),
            payload,
        }
    }
}

/// Identifiers that appear in matrix and report files are restricted to
/// `[A-Za-z0-9_.-]` so those formats never need quoting.
pub fn is_plain_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
}
