//! Slow thinking: the dynamic workflow solver.
//!
//! One attempt runs reflection, expert design, chain construction, sequential
//! expert execution (with code repair for Tool experts) and a final judgment.
//! Attempts that are not judged correct, or whose experts fail, are rerun
//! from the reflection with a nudge toward a different decomposition.

mod design;
mod execute;
mod reflection;

use std::io::Write;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::executor::{ExecutorError, ToolExecutor, DEFAULT_TIMEOUT_S};
use crate::gateway::{Gateway, GatewayError, GenerationParams, TokenUsage};
use crate::prompt_kit::{PromptCatalog, PromptError, Verdict};
use crate::trajectory::Exchange;

pub use design::{
    build_workflow, design_payload, ensure_final_reviewer, ensure_unique, parse_design, ExpertDesign, ExpertSpec,
    WorkflowGraph, DEFAULT_REVIEWER, EXPERTS_DESIGN,
};
pub use execute::{CodeAttempt, ExpertResult, JudgmentReport, MY_FINAL_OUTPUT, PYTHON_EXECUTION_RESULT};
pub use reflection::{
    enumerate_items, is_tool_suited, parse_reflection, ProblemReflection, SubTask, PROBLEM_REFLECTION,
};

pub const DEFAULT_RERUN_NUDGE: &str = "A previous attempt at this problem did not pass the final review. \
Break the problem down in a different way this time: choose sub-tasks that differ from an obvious first split, \
and prefer steps whose results can be checked with code where that makes sense.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkflowSettings {
    /// Total code attempts per Tool expert (first try plus repairs).
    pub max_code_attempts: u32,
    /// Total workflow attempts (first run plus reruns).
    pub max_attempts: u32,
    pub code_timeout_s: f64,
    /// Character budget for an assembled expert prompt. Beyond it, the oldest
    /// experts' transcripts are replaced by their extracted outputs.
    pub context_budget_chars: usize,
    pub rerun_nudge: String,
}

impl Default for WorkflowSettings {
    fn default() -> Self {
        Self {
            max_code_attempts: 3,
            max_attempts: 3,
            code_timeout_s: DEFAULT_TIMEOUT_S,
            context_budget_chars: 48_000,
            rerun_nudge: DEFAULT_RERUN_NUDGE.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("problem statement is empty")]
    EmptyProblem,
    #[error("no enumerated sub-tasks in the reflection")]
    NoSubtasksParsed,
    #[error("expert design: {0}")]
    Design(PromptError),
    #[error("duplicate expert name {0:?}")]
    DuplicateExpertName(String),
    #[error("invalid workflow graph: {0}")]
    InvalidGraph(String),
    #[error("code still failing after {0} attempts")]
    RepairExhausted(u32),
    #[error("expert {name:?} failed: {cause}")]
    ExpertFailed { name: String, cause: Box<WorkflowError> },
    #[error("all {attempts} workflow attempts failed")]
    AllAttemptsFailed {
        attempts: u32,
        history: Vec<AttemptRecord>,
        /// The final attempt's solution, when that attempt got as far as judgment.
        last: Option<Box<SlowSolution>>,
    },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Executor(#[from] ExecutorError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

impl WorkflowError {
    /// Failures caused by what the model wrote, which a rerun may fix.
    pub fn is_rerunnable(&self) -> bool {
        matches!(
            self,
            WorkflowError::NoSubtasksParsed
                | WorkflowError::Design(_)
                | WorkflowError::DuplicateExpertName(_)
                | WorkflowError::InvalidGraph(_)
                | WorkflowError::ExpertFailed { .. }
                | WorkflowError::RepairExhausted(_)
        )
    }

    /// The repair bound, when this is (or wraps) a repair exhaustion.
    pub fn repair_exhausted(&self) -> Option<u32> {
        match self {
            WorkflowError::RepairExhausted(r) => Some(*r),
            WorkflowError::ExpertFailed { cause, .. } => cause.repair_exhausted(),
            _ => None,
        }
    }
}

/// Everything one workflow attempt produced, whether or not it succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: u32,
    pub exchanges: Vec<Exchange>,
    pub final_answer: Option<String>,
    pub judgment: Option<Verdict>,
    pub failure: Option<String>,
    pub usage: TokenUsage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowSolution {
    pub final_answer: String,
    pub reflection: ProblemReflection,
    pub design: ExpertDesign,
    pub graph: WorkflowGraph,
    pub results: Vec<ExpertResult>,
    pub judgment: Verdict,
    /// 1-based attempt that produced this solution.
    pub attempt: u32,
    /// Usage of this attempt only.
    pub usage: TokenUsage,
    /// Every attempt made, this one included.
    pub history: Vec<AttemptRecord>,
}

impl SlowSolution {
    /// Usage across every attempt.
    pub fn total_usage(&self) -> TokenUsage {
        self.history.iter().map(|a| a.usage).sum()
    }
}

type StageLog = Arc<Mutex<Box<dyn Write + Send>>>;

/// Runs dynamic workflows against a gateway and a tool executor.
#[derive(Clone)]
pub struct WorkflowEngine {
    gateway: Gateway,
    executor: Arc<dyn ToolExecutor>,
    catalog: Arc<PromptCatalog>,
    params: GenerationParams,
    settings: WorkflowSettings,
    stage_log: Option<StageLog>,
}

impl std::fmt::Debug for WorkflowEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkflowEngine")
            .field("gateway", &self.gateway)
            .field("settings", &self.settings)
            .finish_non_exhaustive()
    }
}

#[derive(Serialize)]
struct StageLogLine<'a> {
    attempt: u32,
    #[serde(flatten)]
    exchange: &'a Exchange,
}

impl WorkflowEngine {
    pub fn new(gateway: Gateway, executor: Arc<dyn ToolExecutor>) -> Self {
        Self {
            gateway,
            executor,
            catalog: Arc::new(PromptCatalog::builtin()),
            params: GenerationParams::default(),
            settings: WorkflowSettings::default(),
            stage_log: None,
        }
    }

    pub fn with_settings(mut self, settings: WorkflowSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_catalog(mut self, catalog: Arc<PromptCatalog>) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn with_params(mut self, params: GenerationParams) -> Self {
        self.params = params;
        self
    }

    /// Appends one JSON line per backend call to `sink`.
    pub fn with_stage_log(mut self, sink: Box<dyn Write + Send>) -> Self {
        self.stage_log = Some(Arc::new(Mutex::new(sink)));
        self
    }

    pub fn settings(&self) -> &WorkflowSettings {
        &self.settings
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    fn log_exchange(&self, attempt: u32, exchange: &Exchange) {
        let Some(log) = &self.stage_log else { return };
        let mut sink = log.lock().expect("stage log poisoned");
        let line = serde_json::to_string(&StageLogLine { attempt, exchange }).expect("exchange serializes");
        if let Err(e) = writeln!(sink, "{line}").and_then(|_| sink.flush()) {
            tracing::warn!("stage log write failed: {e}");
        }
    }

    /// Reflection: restatement plus enumerated sub-tasks.
    pub fn reflect(&self, problem: &str) -> Result<ProblemReflection, WorkflowError> {
        self.reflect_with(problem, None, &mut Vec::new())
    }

    /// Expert design on top of a reflection, normalized to end with an LLM expert.
    pub fn design_experts(&self, problem: &str, reflection: &ProblemReflection) -> Result<ExpertDesign, WorkflowError> {
        self.design_with(problem, reflection, &mut Vec::new())
    }

    /// Runs every expert of `graph` in chain order.
    pub fn execute_workflow(
        &self,
        graph: &WorkflowGraph,
        problem: &str,
        reflection: &ProblemReflection,
        design_text: &str,
    ) -> Result<Vec<ExpertResult>, WorkflowError> {
        self.execute_with(graph, problem, reflection, design_text, &mut Vec::new())
    }

    /// Writes, runs and repairs code for one Tool expert.
    pub fn run_tool_expert(
        &self,
        spec: &ExpertSpec,
        problem: &str,
        reflection: &ProblemReflection,
        design_text: &str,
        prior: &[ExpertResult],
    ) -> Result<ExpertResult, WorkflowError> {
        let ctx = execute::Context { problem, reflection: &reflection.text(), design: design_text };
        self.tool_expert_with(spec, &ctx, prior, &mut Vec::new())
    }

    /// Final judgment over all expert results.
    pub fn judge(
        &self,
        problem: &str,
        reflection: &ProblemReflection,
        design_text: &str,
        results: &[ExpertResult],
    ) -> Result<JudgmentReport, WorkflowError> {
        let ctx = execute::Context { problem, reflection: &reflection.text(), design: design_text };
        self.judge_with(&ctx, results, &mut Vec::new())
    }

    fn run_attempt(&self, problem: &str, attempt: u32, log: &mut Vec<Exchange>) -> Result<SlowSolution, WorkflowError> {
        let nudge = (attempt > 1).then_some(self.settings.rerun_nudge.as_str());
        let reflection = self.reflect_with(problem, nudge, log)?;
        let design = self.design_with(problem, &reflection, log)?;
        let graph = build_workflow(design.experts.clone())?;
        let results = self.execute_with(&graph, problem, &reflection, &design.text, log)?;
        let ctx = execute::Context { problem, reflection: &reflection.text(), design: &design.text };
        let judgment = self.judge_with(&ctx, &results, log)?;
        let final_answer = results.last().map(|r| r.output.clone()).unwrap_or_default();
        let usage = log.iter().map(|e| e.usage).sum();
        Ok(SlowSolution {
            final_answer,
            reflection,
            design,
            graph,
            results,
            judgment: judgment.verdict,
            attempt,
            usage,
            history: Vec::new(),
        })
    }

    /// Full slow solve with reruns, up to `max_attempts` attempts.
    pub fn solve_slow(&self, problem: &str) -> Result<SlowSolution, WorkflowError> {
        if problem.trim().is_empty() {
            return Err(WorkflowError::EmptyProblem);
        }
        let max = self.settings.max_attempts.max(1);
        let mut history = Vec::new();
        let mut last = None;
        for attempt in 1..=max {
            let mut log = Vec::new();
            let outcome = self.run_attempt(problem, attempt, &mut log);
            for e in &log {
                self.log_exchange(attempt, e);
            }
            let usage = log.iter().map(|e| e.usage).sum();
            match outcome {
                Ok(solution) => {
                    history.push(AttemptRecord {
                        attempt,
                        exchanges: log,
                        final_answer: Some(solution.final_answer.clone()),
                        judgment: Some(solution.judgment.clone()),
                        failure: None,
                        usage,
                    });
                    if solution.judgment.is_yes() {
                        return Ok(SlowSolution { history, ..solution });
                    }
                    tracing::info!(attempt, verdict = %solution.judgment.value, "judgment did not pass, rerunning");
                    last = Some(solution);
                }
                Err(e) if e.is_rerunnable() => {
                    tracing::info!(attempt, error = %e, "attempt failed, rerunning");
                    history.push(AttemptRecord {
                        attempt,
                        exchanges: log,
                        final_answer: None,
                        judgment: None,
                        failure: Some(e.to_string()),
                        usage,
                    });
                    last = None;
                }
                Err(e) => return Err(e),
            }
        }
        let last = last.map(|s| Box::new(SlowSolution { history: history.clone(), ..s }));
        Err(WorkflowError::AllAttemptsFailed { attempts: max, history, last })
    }
}
