//! Runs Python through a sandbox runner process over the JSON-lines protocol.
//!
//! ```bash
//! cargo run -p hdflow --example sandbox_runner -- python3 crates/core/tests/fixtures/mini_runner.py
//! ```
//!
//! With no arguments the `hdflow-sandbox` runner on `PATH` is used.

use hdflow::executor::{ExecutionRequest, SubprocessConfig, SubprocessExecutor, DEFAULT_RUNNER};
use hdflow::ToolExecutor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut command: Vec<String> = std::env::args().skip(1).collect();
    if command.is_empty() {
        command.push(DEFAULT_RUNNER.into());
    }
    let executor = SubprocessExecutor::new(SubprocessConfig { command, ..Default::default() })?;

    let requests = [
        ExecutionRequest::new("print(6 * 7)"),
        ExecutionRequest::new("import sys\nprint(sys.stdin.read().upper())").with_stdin("from stdin"),
        ExecutionRequest::new("print(undefined_name)"),
        ExecutionRequest::new("while True:\n    pass").with_timeout(1.0),
    ];
    for req in &requests {
        let out = executor.execute(req)?;
        println!("{:?}", req.code.lines().next().unwrap_or_default());
        println!("  exit {}  timed_out {}  {} ms", out.exit_code, out.timed_out, out.duration_ms);
        if !out.stdout.is_empty() {
            println!("  stdout {:?}", out.stdout);
        }
        if !out.succeeded() {
            println!("  error  {:?}", out.error_message().lines().last().unwrap_or_default());
        }
    }
    Ok(())
}
