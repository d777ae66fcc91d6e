//! Evaluates scripted Game of 24 items in every mode and prints the report.
//!
//! ```bash
//! cargo run -p hdflow --example eval_report
//! ```

use std::sync::Arc;

use hdflow::bench::{build_report, evaluate, gen_game24, EvalRecord};
use hdflow::fixtures::game24::{backend, Plan};
use hdflow::trajectory::SolveMode;
use hdflow::{Gateway, HybridController, TableExecutor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let items = gen_game24(7, 4);
    let plans = [
        Plan { fast_correct: true, fast_verified: true, slow_correct: true },
        Plan { fast_correct: false, fast_verified: false, slow_correct: true },
        Plan { fast_correct: false, fast_verified: false, slow_correct: false },
        Plan { fast_correct: true, fast_verified: true, slow_correct: true },
    ];
    let gateway = Gateway::new(Arc::new(backend(&items, &plans)));
    let controller = HybridController::from_gateway(gateway, Arc::new(TableExecutor::default()));

    let mut records: Vec<EvalRecord> = Vec::new();
    for mode in [SolveMode::Fast, SolveMode::Slow, SolveMode::Hybrid] {
        let lines = evaluate(&items, mode, &controller, 2)?;
        records.extend(lines.into_iter().map(|l| l.eval));
    }
    for r in records.iter().filter(|r| r.mode == SolveMode::Hybrid) {
        println!("{:<14} used {:<4} correct {:<5} answer {:?}", r.item_id, r.mode_used, r.correct, r.answer);
    }
    println!();
    let report = build_report(&records);
    print!("{}", report.render_table());
    println!("\n{}", serde_json::to_string_pretty(&report.rows[0])?);
    Ok(())
}
