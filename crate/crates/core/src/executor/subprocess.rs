use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::{mpsc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{
    ExecutionOutcome, ExecutionRequest, ExecutorError, ToolExecutor, DEFAULT_TIMEOUT_CEILING_S, MAX_STREAM_BYTES,
};

pub const DEFAULT_RUNNER: &str = "hdflow-sandbox";
const GRACE: Duration = Duration::from_secs(1);
const MAX_LINE_BYTES: u64 = 8 * MAX_STREAM_BYTES as u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubprocessConfig {
    /// Runner program followed by its arguments.
    pub command: Vec<String>,
    /// Maximum number of runner processes alive at once.
    pub pool_size: usize,
    pub timeout_ceiling_s: f64,
}

impl Default for SubprocessConfig {
    fn default() -> Self {
        Self { command: vec![DEFAULT_RUNNER.into()], pool_size: 4, timeout_ceiling_s: DEFAULT_TIMEOUT_CEILING_S }
    }
}

/// Client for the sandbox runner: one fresh runner process per request,
/// request and response exchanged as single JSON lines.
#[derive(Debug)]
pub struct SubprocessExecutor {
    config: SubprocessConfig,
    slots: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a SubprocessExecutor);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.slots.lock().expect("pool poisoned") += 1;
        self.0.freed.notify_one();
    }
}

impl SubprocessExecutor {
    pub fn new(config: SubprocessConfig) -> Result<Self, ExecutorError> {
        if config.command.is_empty() || config.command[0].trim().is_empty() {
            return Err(ExecutorError::ExecutorUnavailable("runner command is empty".into()));
        }
        let slots = config.pool_size.max(1);
        Ok(Self { config, slots: Mutex::new(slots), freed: Condvar::new() })
    }

    pub fn config(&self) -> &SubprocessConfig {
        &self.config
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.slots.lock().expect("pool poisoned");
        while *free == 0 {
            free = self.freed.wait(free).expect("pool poisoned");
        }
        *free -= 1;
        Permit(self)
    }

    fn spawn(&self) -> Result<Child, ExecutorError> {
        Command::new(&self.config.command[0])
            .args(&self.config.command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| ExecutorError::ExecutorUnavailable(format!("{}: {e}", self.config.command[0])))
    }
}

fn reap(child: &mut Child) {
    let _ = child.kill();
    let _ = child.wait();
}

impl ToolExecutor for SubprocessExecutor {
    fn execute(&self, request: &ExecutionRequest) -> Result<ExecutionOutcome, ExecutorError> {
        request.validate(self.config.timeout_ceiling_s)?;
        let _permit = self.acquire();
        let started = Instant::now();
        let mut child = self.spawn()?;

        let mut line = serde_json::to_string(request).expect("request serializes");
        line.push('\n');
        let mut stdin = child.stdin.take().expect("stdin is piped");
        if let Err(e) = stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()) {
            reap(&mut child);
            return Err(ExecutorError::ExecutorUnavailable(format!("writing request: {e}")));
        }
        drop(stdin);

        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = BufReader::new(stdout.take(MAX_LINE_BYTES));
            let mut buf = String::new();
            let _ = tx.send(reader.read_line(&mut buf).map(|_| buf));
        });

        let wait = Duration::from_secs_f64(request.timeout_s) + GRACE;
        let received = rx.recv_timeout(wait);
        reap(&mut child);
        let elapsed = started.elapsed().as_millis() as u64;

        match received {
            Err(_) => Ok(ExecutionOutcome::timeout(request.timeout_s, elapsed)),
            Ok(Err(e)) => Err(ExecutorError::Protocol(format!("reading response: {e}"))),
            Ok(Ok(text)) if text.trim().is_empty() => {
                Err(ExecutorError::Protocol("runner closed without a response".into()))
            }
            Ok(Ok(text)) => {
                let outcome: ExecutionOutcome = serde_json::from_str(text.trim_end())
                    .map_err(|e| ExecutorError::Protocol(format!("bad response line: {e}")))?;
                Ok(outcome.capped(MAX_STREAM_BYTES))
            }
        }
    }
}
