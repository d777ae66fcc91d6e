//! Ten scripted problems: six pass fast verification, four escalate.
//!
//! ```bash
//! cargo run -p hdflow --example hybrid_routing
//! ```

use std::sync::Arc;

use hdflow::fixtures::arithmetic;
use hdflow::{mode_ratio, Gateway, HybridController, ModeUsed, TableExecutor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let passing = 6;
    let backend = Arc::new(arithmetic::backend(passing));
    let controller = HybridController::from_gateway(Gateway::new(backend.clone()), Arc::new(TableExecutor::default()));

    let mut outcomes = Vec::new();
    for (i, problem) in arithmetic::problems().iter().enumerate() {
        let out = controller.solve(problem)?;
        println!("#{i}  {:<4}  answer {:>4}  tokens {:>5}", out.mode_used, out.answer, out.usage.total);
        outcomes.push(out);
    }

    let stats = mode_ratio(&outcomes);
    let mean = |m: ModeUsed| {
        let xs: Vec<u64> = outcomes.iter().filter(|o| o.mode_used == m).map(|o| o.usage.total).collect();
        xs.iter().sum::<u64>() as f64 / xs.len().max(1) as f64
    };
    println!("fast ratio {:?} ({} fast / {} slow)", stats.fast_ratio, stats.fast_count, stats.slow_count);
    println!("mean tokens: fast {:.1}, slow {:.1}", mean(ModeUsed::Fast), mean(ModeUsed::Slow));
    println!("backend calls {} (expected {})", backend.call_count(), arithmetic::expected_calls(passing));
    Ok(())
}
