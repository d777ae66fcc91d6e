//! Running tool-expert code.
//!
//! [`TableExecutor`] answers from a fixed table keyed by a whitespace-insensitive
//! code fingerprint. [`SubprocessExecutor`] hands each request to a fresh
//! sandbox runner process over a JSON-lines protocol.

mod subprocess;
mod table;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use subprocess::{SubprocessConfig, SubprocessExecutor, DEFAULT_RUNNER};
pub use table::{fingerprint, make_table_executor, TableExecutor, NO_FIXTURE};

pub const DEFAULT_TIMEOUT_S: f64 = 10.0;
pub const DEFAULT_TIMEOUT_CEILING_S: f64 = 120.0;
/// Per-stream capture limit.
pub const MAX_STREAM_BYTES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRequest {
    pub code: String,
    pub timeout_s: f64,
    #[serde(rename = "stdin", default)]
    pub stdin_data: String,
}

impl ExecutionRequest {
    pub fn new(code: impl Into<String>) -> Self {
        Self { code: code.into(), timeout_s: DEFAULT_TIMEOUT_S, stdin_data: String::new() }
    }

    pub fn with_timeout(mut self, timeout_s: f64) -> Self {
        self.timeout_s = timeout_s;
        self
    }

    pub fn with_stdin(mut self, stdin: impl Into<String>) -> Self {
        self.stdin_data = stdin.into();
        self
    }

    pub fn validate(&self, ceiling_s: f64) -> Result<(), ExecutorError> {
        if self.code.trim().is_empty() {
            return Err(ExecutorError::InvalidRequest("code is empty".into()));
        }
        if !(self.timeout_s > 0.0 && self.timeout_s <= ceiling_s) {
            return Err(ExecutorError::InvalidRequest(format!("timeout {}s outside (0, {ceiling_s}]", self.timeout_s)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionOutcome {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
    pub duration_ms: u64,
    pub timed_out: bool,
    /// Set when either stream was cut at [`MAX_STREAM_BYTES`].
    #[serde(default)]
    pub truncated: bool,
}

impl ExecutionOutcome {
    pub fn ok(stdout: impl Into<String>) -> Self {
        Self {
            stdout: stdout.into(),
            stderr: String::new(),
            exit_code: 0,
            duration_ms: 0,
            timed_out: false,
            truncated: false,
        }
    }

    pub fn failed(stderr: impl Into<String>, exit_code: i32) -> Self {
        Self {
            stdout: String::new(),
            stderr: stderr.into(),
            exit_code,
            duration_ms: 0,
            timed_out: false,
            truncated: false,
        }
    }

    pub fn timeout(timeout_s: f64, duration_ms: u64) -> Self {
        Self {
            stdout: String::new(),
            stderr: format!("execution timed out after {timeout_s}s"),
            exit_code: -1,
            duration_ms,
            timed_out: true,
            truncated: false,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.exit_code == 0 && !self.timed_out
    }

    /// Text handed back to the model when asking it to repair the code.
    pub fn error_message(&self) -> String {
        let stderr = self.stderr.trim();
        match (self.timed_out, stderr.is_empty()) {
            (true, true) => "Execution timed out.".into(),
            (true, false) => format!("Execution timed out.\n{stderr}"),
            (false, false) => stderr.to_string(),
            (false, true) => format!("Process exited with code {} and no error output.", self.exit_code),
        }
    }

    /// Cuts both streams to `limit` bytes on a char boundary.
    pub fn capped(mut self, limit: usize) -> Self {
        for s in [&mut self.stdout, &mut self.stderr] {
            if s.len() > limit {
                let mut end = limit;
                while !s.is_char_boundary(end) {
                    end -= 1;
                }
                s.truncate(end);
                self.truncated = true;
            }
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecutorError {
    #[error("invalid execution request: {0}")]
    InvalidRequest(String),
    #[error("executor unavailable: {0}")]
    ExecutorUnavailable(String),
    #[error("runner protocol error: {0}")]
    Protocol(String),
}

/// Runs code. Code-level failures (exceptions, nonzero exits, timeouts) are
/// reported inside the outcome; `Err` is reserved for the executor itself.
pub trait ToolExecutor: Send + Sync {
    fn execute(&self, request: &ExecutionRequest) -> Result<ExecutionOutcome, ExecutorError>;
}

impl<T: ToolExecutor + ?Sized> ToolExecutor for std::sync::Arc<T> {
    fn execute(&self, request: &ExecutionRequest) -> Result<ExecutionOutcome, ExecutorError> {
        (**self).execute(request)
    }
}
