//! Task generation, dedup, problem writing and validity gating, offline.
//!
//! ```bash
//! cargo run -p hdflow --example synth_funnel
//! ```

use std::sync::Arc;

use hdflow::fixtures::synthesis;
use hdflow::synth::{bundled_seeds, ProblemStatus, Synthesizer};
use hdflow::Gateway;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let backend = Arc::new(synthesis::backend());
    let synth = Synthesizer::new(Gateway::new(backend.clone()));

    let funnel = synth.run_funnel(&bundled_seeds(), true)?;
    println!("generated {} tasks, {} after dedup", funnel.generated, funnel.tasks.len());
    for status in [ProblemStatus::Valid, ProblemStatus::Rewritten, ProblemStatus::Invalid] {
        let n = funnel.problems.iter().filter(|p| p.status == status).count();
        println!("  {status:?}: {n}");
    }
    println!("exportable: {} of {}", funnel.exportable().count(), funnel.problems.len());
    if let Some(p) = funnel.problems.iter().find(|p| p.text.starts_with("Decode")) {
        println!("sample: {}", p.text);
    }
    println!("backend calls: {}", backend.call_count());
    Ok(())
}
