//! Spawning external commands with a deadline.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use wait_timeout::ChildExt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Captured {
    pub status: Option<i32>,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProcessError {
    #[error("cannot launch `{program}`: {reason}")]
    Launch { program: String, reason: String },
    #[error("`{program}` timed out after {millis} ms")]
    Timeout { program: String, millis: u64 },
    #[error("`{program}` i/o failure: {reason}")]
    Io { program: String, reason: String },
}

/// Runs `program args...`, feeding `stdin`, and waits at most `timeout`.
pub fn run(
    program: &str,
    args: &[String],
    stdin: Option<&str>,
    timeout: Duration,
) -> Result<Captured, ProcessError> {
    let mut child = Command::new(program)
        .args(args)
        .stdin(if stdin.is_some() {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| ProcessError::Launch {
            program: program.to_owned(),
            reason: e.to_string(),
        })?;

    let io_err = |e: std::io::Error| ProcessError::Io {
        program: program.to_owned(),
        reason: e.to_string(),
    };

    // Readers run on their own threads so a chatty child cannot fill a pipe
    // and block before we get to wait on it.
    let mut out_pipe = child.stdout.take().expect("stdout piped");
    let mut err_pipe = child.stderr.take().expect("stderr piped");
    let out_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        out_pipe.read_to_end(&mut buf).map(|_| buf)
    });
    let err_reader = thread::spawn(move || {
        let mut buf = Vec::new();
        err_pipe.read_to_end(&mut buf).map(|_| buf)
    });

    if let Some(text) = stdin {
        let mut pipe = child.stdin.take().expect("stdin piped");
        // A child that exits without reading its input closes the pipe early.
        match pipe.write_all(text.as_bytes()) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            Err(e) => return Err(io_err(e)),
        }
    }

    let status = match child.wait_timeout(timeout).map_err(io_err)? {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(ProcessError::Timeout {
                program: program.to_owned(),
                millis: timeout.as_millis() as u64,
            });
        }
    };

    let stdout = out_reader
        .join()
        .expect("stdout reader panicked")
        .map_err(io_err)?;
    let stderr = err_reader
        .join()
        .expect("stderr reader panicked")
        .map_err(io_err)?;
    Ok(Captured {
        status: status.code(),
        stdout: String::from_utf8_lossy(&stdout).into_owned(),
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
    })
}
