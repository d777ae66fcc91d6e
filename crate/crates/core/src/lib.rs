//! # hdflow
//!
//! Hybrid fast/slow reasoning orchestration for text-completion models.
//!
//! A problem is first answered with a single chain-of-thought call and a
//! step-wise self-verification call. When the verification does not come back
//! with an explicit `FINAL EVALUATION: YES`, the problem is escalated to the
//! dynamic workflow solver:
//!
//! 1. **Problem reflection**: restate the problem and enumerate sub-tasks.
//! 2. **Expert design**: a team of LLM and Tool experts, each described by a
//!    JSON name card, arranged as a sequential chain.
//! 3. **Execution**: experts run in order, each seeing the results of the
//!    ones before it. Tool experts write Python which is executed out of
//!    process and repaired from its error output. A final judgment decides
//!    whether the whole pipeline is rerun with a different decomposition.
//!
//! Around the solvers sit a benchmark harness ([`bench`]) with an exact
//! Game-of-24 checker, and a problem synthesis pipeline ([`synth`]) that
//! generates tasks, removes near duplicates, writes concrete problems, gates
//! them for validity and exports solve trajectories as training rows.
//!
//! ## Module map
//!
//! ```text
//! gateway      completion backends (HTTP, scripted), retry, token accounting
//! prompt_kit   prompt catalog + parsers for blocks, cards, verdicts, code
//! executor     tool-code execution: table fake, sandbox runner client
//! fast         chain-of-thought solve + self-verification
//! workflow     reflection, expert design, chain execution, judgment, rerun
//! hybrid       fast-first routing with escalation, mode ratios
//! synth        task generation, dedup, problem synthesis, validity gating
//! trajectory   (query, answer) records and training-row export
//! bench        datasets, checkers, evaluation runs, reports
//! config       JSON run configuration shared by the CLI and examples
//! ```
//!
//! Every capability has a runnable example under `crates/core/examples/`;
//! most run fully offline against the scripted backend:
//!
//! ```bash
//! cargo run -p hdflow --example morse_replay
//! cargo run -p hdflow --example hybrid_routing
//! ```

pub mod bench;
pub mod config;
pub mod executor;
pub mod fast;
pub mod fixtures;
pub mod gateway;
pub mod hybrid;
pub mod jsonl;
pub mod prompt_kit;
pub mod synth;
pub mod trajectory;
pub mod workflow;

pub use executor::{ExecutionOutcome, ExecutionRequest, TableExecutor, ToolExecutor};
pub use fast::{FastSolution, FastThinker, VerificationReport};
pub use gateway::{
    ChatMessage, CompletionRequest, CompletionResult, Gateway, GatewayError, Role, ScriptedBackend, TokenUsage,
};

pub use hybrid::{mode_ratio, solve_hybrid, HybridController, HybridOutcome, ModeStats, ModeUsed};
pub use prompt_kit::{ExpertCard, ExpertType, PromptCatalog, Verdict, VerdictValue};
pub use trajectory::{export_trajectories, SolveMode, TrajectoryRecord};
pub use workflow::{SlowSolution, WorkflowEngine, WorkflowGraph, WorkflowSettings};
