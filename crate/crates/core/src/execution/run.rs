use serde::{Deserialize, Serialize};

use super::sut::{ExecError, SutAdapter};
use crate::exec::Exec;
use crate::model::{MetamorphicGroup, MetamorphicRelation, Output, TestSuite};
use crate::value::TestInput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Satisfied,
    Violated,
    ExecutionError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MgVerdict {
    pub mg_id: String,
    pub mr_id: String,
    pub status: VerdictStatus,
    pub source_outputs: Vec<Output>,
    pub followup_outputs: Vec<Output>,
    /// Predicate trace, or the execution error.
    pub detail: String,
}

impl MgVerdict {
    fn error(mg: &MetamorphicGroup, source_outputs: Vec<Output>, followup_outputs: Vec<Output>, detail: String) -> Self {
        MgVerdict {
            mg_id: mg.id.clone(),
            mr_id: mg.mr.clone(),
            status: VerdictStatus::ExecutionError,
            source_outputs,
            followup_outputs,
            detail,
        }
    }

    pub fn is_violated(&self) -> bool {
        self.status == VerdictStatus::Violated
    }

    /// True for launch failures, as opposed to crashes or timeouts of a running SUT.
    pub fn is_launch_failure(&self) -> bool {
        self.status == VerdictStatus::ExecutionError && self.detail.starts_with(LAUNCH_PREFIX)
    }
}

const LAUNCH_PREFIX: &str = "cannot launch";

/// Executes the sources, then the follow-ups, and checks the output relation.
pub fn run_mg(mg: &MetamorphicGroup, mr: &MetamorphicRelation, sources: &[&TestInput], sut: &SutAdapter) -> MgVerdict {
    let mut source_outputs = Vec::with_capacity(sources.len());
    for s in sources {
        match sut.execute(&s.payload) {
            Ok(out) => source_outputs.push(out),
            Err(e) => return MgVerdict::error(mg, source_outputs, Vec::new(), exec_detail(&s.id, &e)),
        }
    }
    let mut followup_outputs = Vec::with_capacity(mg.followups.len());
    for (i, f) in mg.followups.iter().enumerate() {
        match sut.execute(f) {
            Ok(out) => followup_outputs.push(out),
            Err(e) => {
                return MgVerdict::error(
                    mg,
                    source_outputs,
                    followup_outputs,
                    exec_detail(&format!("follow-up #{i}"), &e),
                )
            }
        }
    }
    match mr.output.evaluate(&source_outputs, &followup_outputs) {
        Ok(ev) => MgVerdict {
            mg_id: mg.id.clone(),
            mr_id: mg.mr.clone(),
            status: if ev.holds {
                VerdictStatus::Satisfied
            } else {
                VerdictStatus::Violated
            },
            source_outputs,
            followup_outputs,
            detail: ev.trace,
        },
        Err(reason) => MgVerdict::error(mg, source_outputs, followup_outputs, format!("unparseable output: {reason}")),
    }
}

fn exec_detail(what: &str, e: &ExecError) -> String {
    match e {
        ExecError::Launch(_) => format!("{LAUNCH_PREFIX} SUT for {what}: {e}"),
        _ => format!("{what}: {e}"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Upper bound on concurrently executing groups; 0 means the pool default.
    pub workers: usize,
    pub exec: Exec,
}

/// One verdict per group, ordered by group id. A group referencing an unknown
/// MR or input gets an execution-error verdict.
pub fn run_suite(suite: &TestSuite, sut: &SutAdapter, opts: RunOptions) -> Vec<MgVerdict> {
    let mut groups: Vec<&MetamorphicGroup> = suite.mgs.iter().collect();
    groups.sort_by(|a, b| a.id.cmp(&b.id));
    let exec = if sut.concurrent_safe() {
        opts.exec
    } else {
        Exec::Sequential
    };
    exec.map_bounded(opts.workers, &groups, |mg| {
        let Some(mr) = suite.mr(&mg.mr) else {
            return MgVerdict::error(mg, Vec::new(), Vec::new(), format!("unknown MR `{}`", mg.mr));
        };
        let sources: Option<Vec<&TestInput>> = mg.sources.iter().map(|s| suite.input(s)).collect();
        match sources {
            Some(sources) => run_mg(mg, mr, &sources, sut),
            None => MgVerdict::error(mg, Vec::new(), Vec::new(), "unknown source input".into()),
        }
    })
}
