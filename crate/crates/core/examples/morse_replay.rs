//! Replays the Morse code transcript through the slow solver, offline.
//!
//! ```bash
//! cargo run -p hdflow --example morse_replay
//! ```

use std::sync::Arc;

use hdflow::fixtures::morse;
use hdflow::{Gateway, WorkflowEngine};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let backend = Arc::new(morse::backend());
    let executor = Arc::new(morse::executor());
    let engine = WorkflowEngine::new(Gateway::new(backend.clone()), executor.clone());

    let solution = engine.solve_slow(morse::PROBLEM)?;

    println!("sub-tasks:");
    for t in &solution.reflection.subtasks {
        println!("  {}. {}{}", t.index, t.title(), if t.tool_suited { "  [tool]" } else { "" });
    }
    println!("experts:");
    for r in &solution.results {
        let preview: String = r.output.chars().take(60).collect();
        println!("  {:<40} {:?}  -> {}", r.expert_name, r.expert_type, preview.replace('\n', " "));
    }
    println!("judgment: {}", solution.judgment.value);
    println!("answer:   {}", solution.final_answer);
    println!(
        "calls: {}  code runs: {}  tokens: {}",
        backend.call_count(),
        executor.call_count(),
        solution.total_usage()
    );
    Ok(())
}
