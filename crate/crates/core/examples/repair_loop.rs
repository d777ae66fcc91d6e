//! A Tool expert's code fails, the error goes back to the model, the fix runs.
//!
//! ```bash
//! cargo run -p hdflow --example repair_loop -- 1   # buggy programs before the fix
//! ```

use std::sync::Arc;

use hdflow::fixtures::repair;
use hdflow::workflow::WorkflowError;
use hdflow::{Gateway, WorkflowEngine};

fn main() {
    let failures = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let backend = Arc::new(repair::backend(failures));
    let engine = WorkflowEngine::new(Gateway::new(backend.clone()), Arc::new(repair::executor()));

    match engine.run_tool_expert(&repair::spec(), repair::PROBLEM, &repair::reflection(), "", &[]) {
        Ok(result) => {
            for (i, a) in result.code_attempts.iter().enumerate() {
                let status = if a.outcome.succeeded() { "ok" } else { "failed" };
                println!("attempt {}: {status}", i + 1);
            }
            println!("output: {}", result.output);
            println!("transcript:\n{}", result.raw);
        }
        Err(e) => {
            println!("gave up: {e}");
            if let Some(r) = e.repair_exhausted() {
                println!("repair bound reached after {r} attempts");
            }
            if let WorkflowError::ExpertFailed { name, .. } = &e {
                println!("expert: {name}");
            }
        }
    }
    println!("backend calls: {}", backend.call_count());
}
