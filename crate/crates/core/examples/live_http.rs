//! Solves one problem against a real chat-completions endpoint.
//!
//! ```bash
//! export HDFLOW_BASE_URL=https://api.openai.com/v1 HDFLOW_MODEL=gpt-4-turbo HDFLOW_API_KEY=...
//! export HDFLOW_RUNNER="python3 crates/core/tests/fixtures/mini_runner.py"   # optional
//! cargo run -p hdflow --example live_http -- "Use the numbers 4, 7, 8 and 8 to make 24."
//! ```

use std::sync::Arc;

use hdflow::executor::{SubprocessConfig, SubprocessExecutor, DEFAULT_RUNNER};
use hdflow::gateway::{GenerationParams, HttpBackend, HttpBackendConfig};
use hdflow::{FastThinker, Gateway, HybridController, WorkflowEngine};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let Ok(base_url) = std::env::var("HDFLOW_BASE_URL") else {
        eprintln!("set HDFLOW_BASE_URL (and HDFLOW_API_KEY, HDFLOW_MODEL) to run against a live backend");
        return Ok(());
    };
    let problem = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "Use the numbers 4, 7, 8 and 8 to make 24. Answer with a bare expression.".into());
    let params = GenerationParams {
        model: std::env::var("HDFLOW_MODEL").unwrap_or_else(|_| GenerationParams::default().model),
        ..Default::default()
    };
    let runner = std::env::var("HDFLOW_RUNNER").unwrap_or_else(|_| DEFAULT_RUNNER.into());

    let backend = HttpBackend::new(HttpBackendConfig { base_url, ..Default::default() });
    let gateway = Gateway::new(Arc::new(backend));
    let executor = SubprocessExecutor::new(SubprocessConfig {
        command: runner.split_whitespace().map(String::from).collect(),
        ..Default::default()
    })?;
    let controller = HybridController::new(
        FastThinker::new(gateway.clone()).with_params(params.clone()),
        WorkflowEngine::new(gateway.clone(), Arc::new(executor)).with_params(params),
    );

    let outcome = controller.solve(&problem)?;
    println!("mode:   {}", outcome.mode_used);
    println!("answer: {}", outcome.answer);
    println!("tokens: {} (fast {}, slow {})", outcome.usage, outcome.fast_usage().total, outcome.slow_usage().total);
    println!("calls:  {}", gateway.stats().calls);
    Ok(())
}
