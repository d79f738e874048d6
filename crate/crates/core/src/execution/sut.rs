//! Systems under test and how their outputs are captured.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::model::Output;
use crate::process::{self, ProcessError};
use crate::value::{payload_args, payload_lines, Payload};

/// An in-process system under test. Returns the raw output text.
pub trait Sut: Send + Sync {
    fn execute(&self, payload: &Payload) -> Result<String, String>;
}

impl<F> Sut for F
where
    F: Fn(&Payload) -> Result<String, String> + Send + Sync,
{
    fn execute(&self, payload: &Payload) -> Result<String, String> {
        self(payload)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Feed {
    /// One field per line on standard input.
    #[default]
    Stdin,
    /// Fields as trailing command arguments, in declared order.
    Args,
}

/// Turns raw output text into the token list fed to output predicates.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OutputParser {
    /// Non-empty lines, trimmed.
    #[default]
    Lines,
    /// Every match of `pattern`; capture `group` (0 = whole match). Matches
    /// where the group did not participate are skipped.
    Tokens {
        pattern: String,
        #[serde(default)]
        group: usize,
    },
}

impl OutputParser {
    pub fn parse(&self, text: &str) -> Result<Output, String> {
        match self {
            OutputParser::Lines => Ok(text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect()),
            OutputParser::Tokens { pattern, group } => {
                let re = Regex::new(pattern).map_err(|e| format!("bad token pattern: {e}"))?;
                Ok(re
                    .captures_iter(text)
                    .filter_map(|c| c.get(*group).map(|m| m.as_str().to_owned()))
                    .collect())
            }
        }
    }
}

#[derive(Clone)]
pub enum AdapterMode {
    InProcess {
        imp: Arc<dyn Sut>,
        /// Whether the callback may be invoked from several threads at once.
        concurrent: bool,
    },
    Command {
        program: String,
        args: Vec<String>,
        feed: Feed,
    },
}

impl fmt::Debug for AdapterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdapterMode::InProcess { concurrent, .. } => f
                .debug_struct("InProcess")
                .field("concurrent", concurrent)
                .finish_non_exhaustive(),
            AdapterMode::Command { program, args, feed } => f
                .debug_struct("Command")
                .field("program", program)
                .field("args", args)
                .field("feed", feed)
                .finish(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("cannot launch SUT: {0}")]
    Launch(String),
    #[error("SUT timed out")]
    Timeout,
    #[error("SUT exited with status {status:?}: {stderr}")]
    NonZeroExit { status: Option<i32>, stderr: String },
    #[error("SUT crashed: {0}")]
    Crash(String),
    #[error("unparseable output: {0}")]
    Unparseable(String),
}

#[derive(Debug, Clone)]
pub struct SutAdapter {
    pub id: String,
    pub mode: AdapterMode,
    pub parser: OutputParser,
    pub timeout: Duration,
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

impl SutAdapter {
    pub fn in_process(id: impl Into<String>, imp: Arc<dyn Sut>) -> Self {
        SutAdapter {
            id: id.into(),
            mode: AdapterMode::InProcess { imp, concurrent: true },
            parser: OutputParser::Lines,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn command(id: impl Into<String>, program: impl Into<String>, args: Vec<String>, feed: Feed) -> Self {
        SutAdapter {
            id: id.into(),
            mode: AdapterMode::Command {
                program: program.into(),
                args,
                feed,
            },
            parser: OutputParser::Lines,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_parser(mut self, parser: OutputParser) -> Self {
        self.parser = parser;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn concurrent_safe(&self) -> bool {
        match &self.mode {
            AdapterMode::InProcess { concurrent, .. } => *concurrent,
            AdapterMode::Command { .. } => true,
        }
    }

    /// Raw output text of one execution.
    pub fn execute_raw(&self, payload: &Payload) -> Result<String, ExecError> {
        match &self.mode {
            AdapterMode::InProcess { imp, .. } => match catch_unwind(AssertUnwindSafe(|| imp.execute(payload))) {
                Ok(Ok(text)) => Ok(text),
                Ok(Err(e)) => Err(ExecError::Crash(e)),
                Err(_) => Err(ExecError::Crash("panic".into())),
            },
            AdapterMode::Command { program, args, feed } => {
                let (argv, stdin) = match feed {
                    Feed::Stdin => (args.clone(), Some(payload_lines(payload))),
                    Feed::Args => {
                        let mut a = args.clone();
                        a.extend(payload_args(payload));
                        (a, None)
                    }
                };
                let captured = process::run(program, &argv, stdin.as_deref(), self.timeout).map_err(|e| match e {
                    ProcessError::Launch { .. } => ExecError::Launch(e.to_string()),
                    ProcessError::Timeout { .. } => ExecError::Timeout,
                    ProcessError::Io { .. } => ExecError::Crash(e.to_string()),
                })?;
                if captured.status != Some(0) {
                    return Err(ExecError::NonZeroExit {
                        status: captured.status,
                        stderr: captured.stderr.trim().to_owned(),
                    });
                }
                Ok(captured.stdout)
            }
        }
    }

    pub fn execute(&self, payload: &Payload) -> Result<Output, ExecError> {
        let raw = self.execute_raw(payload)?;
        self.parser.parse(&raw).map_err(ExecError::Unparseable)
    }
}
