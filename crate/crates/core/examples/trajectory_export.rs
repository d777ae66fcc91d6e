//! Turns solve trajectories into training rows. Only verified attempts
//! contribute their full (query, answer) pairs; other attempts keep their
//! verification pairs.
//!
//! ```bash
//! cargo run -p hdflow --example trajectory_export
//! ```

use std::sync::Arc;

use hdflow::fixtures::{arithmetic, judgment};
use hdflow::gateway::ScriptEntry;
use hdflow::hybrid::slow_trajectory;
use hdflow::trajectory::training_rows;
use hdflow::{export_trajectories, Gateway, ScriptedBackend, TableExecutor, WorkflowEngine};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // The first judgment rejects the workflow, so the solve succeeds on attempt 2.
    let mut script =
        vec![ScriptEntry::once(judgment(&arithmetic::marker(0)), "The sum was never checked.\nFINAL EVALUATION: NO")];
    script.extend(arithmetic::script_for(0, false));
    let engine =
        WorkflowEngine::new(Gateway::new(Arc::new(ScriptedBackend::new(script)?)), Arc::new(TableExecutor::default()));

    let solution = engine.solve_slow(&arithmetic::problem(0))?;
    let record = slow_trajectory("suite-0", &solution);
    println!("solved on attempt {} with {} pairs recorded", solution.attempt, record.pairs.len());
    for p in &record.pairs {
        println!("  attempt {}  {:<13} {}", p.attempt, p.exchange.stage, p.exchange.expert.as_deref().unwrap_or(""));
    }

    let rows = training_rows(std::slice::from_ref(&record));
    println!("exported stages: {:?}", rows.iter().map(|r| r.stage.as_str()).collect::<Vec<_>>());
    let mut sink = Vec::new();
    let n = export_trajectories(&[record], &mut sink)?;
    println!("{n} rows, {} bytes of JSON lines", sink.len());
    Ok(())
}
