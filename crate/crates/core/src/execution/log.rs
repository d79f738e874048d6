//! Append-only verdict log, one JSON object per line.

use std::fs::OpenOptions;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::MgVerdict;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    pub suite: String,
    pub sut: String,
    #[serde(flatten)]
    pub verdict: MgVerdict,
}

pub fn append_verdicts(path: &Path, suite: &str, sut: &str, verdicts: &[MgVerdict]) -> io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut buf = Vec::new();
    for v in verdicts {
        let rec = LogRecord {
            suite: suite.to_owned(),
            sut: sut.to_owned(),
            verdict: v.clone(),
        };
        serde_json::to_writer(&mut buf, &rec)?;
        buf.push(b'\n');
    }
    file.write_all(&buf)
}

pub fn read_verdict_log(path: &Path) -> io::Result<Vec<LogRecord>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}
