//! Running metamorphic groups against systems under test, and the
//! fault-detection metrics over mutant sets.

mod log;
mod metrics;
mod run;
mod sut;

pub use log::{append_verdicts, read_verdict_log, LogRecord};
pub use metrics::{detects, fde, fde_from_flags, fdr, FdeOptions, FdeOutcome, MetricsError, MutantSet, VerdictStore};
pub use run::{run_mg, run_suite, MgVerdict, RunOptions, VerdictStatus};
pub use sut::{AdapterMode, ExecError, Feed, OutputParser, Sut, SutAdapter, DEFAULT_TIMEOUT};
