use std::collections::BTreeSet;
use std::path::Path;

use super::{CoverageError, CoverageKind, CoverageMap, TestRequirement};
use crate::value::is_plain_id;

fn parse_err(line: usize, reason: impl Into<String>) -> CoverageError {
    CoverageError::Parse {
        line,
        reason: reason.into(),
    }
}

/// Parses a coverage matrix. When `known_inputs` is given, rows for other
/// input ids are rejected.
pub fn parse_coverage_matrix(
    text: &str,
    kind: CoverageKind,
    known_inputs: Option<&[String]>,
) -> Result<CoverageMap, CoverageError> {
    if !text.is_ascii() {
        return Err(parse_err(0, "matrix must be ASCII"));
    }
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty matrix"))?;
    let mut cols = header.split(',');
    if cols.next() != Some("input_id") {
        return Err(parse_err(1, "header must start with `input_id`"));
    }
    let mut seen = BTreeSet::new();
    let mut requirements = Vec::new();
    for id in cols {
        if !is_plain_id(id) {
            return Err(parse_err(1, format!("bad requirement id `{id}`")));
        }
        if !seen.insert(id) {
            return Err(parse_err(1, format!("duplicate requirement id `{id}`")));
        }
        requirements.push(TestRequirement {
            id: id.to_owned(),
            kind,
            descriptor: id.to_owned(),
        });
    }

    let mut inputs = Vec::new();
    let mut cells = Vec::new();
    let mut seen_inputs = BTreeSet::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let mut fields = line.split(',');
        let id = fields.next().unwrap_or_default();
        if !is_plain_id(id) {
            return Err(parse_err(lineno, format!("bad input id `{id}`")));
        }
        if let Some(known) = known_inputs {
            if !known.iter().any(|k| k == id) {
                return Err(CoverageError::UnknownInputId(id.to_owned()));
            }
        }
        if !seen_inputs.insert(id.to_owned()) {
            return Err(parse_err(lineno, format!("duplicate input id `{id}`")));
        }
        let row: Vec<&str> = fields.collect();
        if row.len() != requirements.len() {
            return Err(parse_err(
                lineno,
                format!("{} cells for {} requirements", row.len(), requirements.len()),
            ));
        }
        for cell in row {
            cells.push(match cell {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(lineno, format!("cell `{other}` is not 0 or 1"))),
            });
        }
        inputs.push(id.to_owned());
    }
    Ok(CoverageMap::new(kind, inputs, requirements, cells))
}

/// Reads a statement or branch coverage matrix from disk.
pub fn ingest_coverage_matrix(
    path: &Path,
    kind: CoverageKind,
    known_inputs: Option<&[String]>,
) -> Result<CoverageMap, CoverageError> {
    if kind.is_black_box() {
        return Err(CoverageError::UnsupportedCriterion(kind));
    }
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(0, format!("{}: {e}", path.display())))?;
    parse_coverage_matrix(&text, kind, known_inputs)
}
