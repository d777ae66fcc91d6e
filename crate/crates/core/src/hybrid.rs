//! Fast-first routing: answer with chain-of-thought, keep the answer when the
//! self-verification says YES, otherwise solve again with the workflow solver.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::executor::ToolExecutor;
use crate::fast::{FastError, FastSolution, FastThinker, VerificationReport};
use crate::gateway::{Gateway, TokenUsage};
use crate::trajectory::{Exchange, Phase, SolveMode, TrajectoryPair, TrajectoryRecord};
use crate::workflow::{AttemptRecord, SlowSolution, WorkflowEngine, WorkflowError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeUsed {
    Fast,
    Slow,
}

impl std::fmt::Display for ModeUsed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeUsed::Fast => "fast",
            ModeUsed::Slow => "slow",
        })
    }
}

/// The chain-of-thought answer and its verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastPhase {
    pub solution: FastSolution,
    pub report: VerificationReport,
}

impl FastPhase {
    pub fn usage(&self) -> TokenUsage {
        self.solution.usage + self.report.usage
    }

    pub fn passed(&self) -> bool {
        self.report.verdict.is_yes()
    }

    pub fn pairs(&self) -> Vec<TrajectoryPair> {
        [&self.solution.exchange, &self.report.exchange]
            .into_iter()
            .map(|e| TrajectoryPair { phase: Phase::Fast, attempt: 1, exchange: e.clone() })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridOutcome {
    pub mode_used: ModeUsed,
    pub answer: String,
    pub fast: FastPhase,
    pub slow: Option<SlowSolution>,
    /// Fast-phase usage plus, when escalated, the usage of every slow attempt.
    pub usage: TokenUsage,
}

impl HybridOutcome {
    pub fn fast_usage(&self) -> TokenUsage {
        self.fast.usage()
    }

    pub fn slow_usage(&self) -> TokenUsage {
        self.slow.as_ref().map(SlowSolution::total_usage).unwrap_or_default()
    }

    pub fn to_trajectory(&self, problem_id: &str) -> TrajectoryRecord {
        let mut pairs = self.fast.pairs();
        match &self.slow {
            None => TrajectoryRecord {
                problem_id: problem_id.to_string(),
                mode: SolveMode::Hybrid,
                pairs,
                final_answer: self.answer.clone(),
                verified: true,
                phase: Phase::Fast,
                attempt: 1,
            },
            Some(slow) => {
                pairs.extend(slow_pairs(&slow.history));
                TrajectoryRecord {
                    problem_id: problem_id.to_string(),
                    mode: SolveMode::Hybrid,
                    pairs,
                    final_answer: slow.final_answer.clone(),
                    verified: slow.judgment.is_yes(),
                    phase: Phase::Slow,
                    attempt: slow.attempt,
                }
            }
        }
    }
}

/// Every exchange of every slow attempt, tagged with its attempt number.
pub fn slow_pairs(history: &[AttemptRecord]) -> Vec<TrajectoryPair> {
    history
        .iter()
        .flat_map(|a| {
            a.exchanges.iter().map(|e: &Exchange| TrajectoryPair {
                phase: Phase::Slow,
                attempt: a.attempt,
                exchange: e.clone(),
            })
        })
        .collect()
}

/// Trajectory of a slow-only solve.
pub fn slow_trajectory(problem_id: &str, solution: &SlowSolution) -> TrajectoryRecord {
    TrajectoryRecord {
        problem_id: problem_id.to_string(),
        mode: SolveMode::Slow,
        pairs: slow_pairs(&solution.history),
        final_answer: solution.final_answer.clone(),
        verified: solution.judgment.is_yes(),
        phase: Phase::Slow,
        attempt: solution.attempt,
    }
}

/// Trajectory of a fast-only solve.
pub fn fast_trajectory(problem_id: &str, fast: &FastPhase) -> TrajectoryRecord {
    TrajectoryRecord {
        problem_id: problem_id.to_string(),
        mode: SolveMode::Fast,
        pairs: fast.pairs(),
        final_answer: fast.solution.answer.clone(),
        verified: fast.passed(),
        phase: Phase::Fast,
        attempt: 1,
    }
}

#[derive(Debug, Error)]
pub enum HybridError {
    #[error(transparent)]
    Fast(#[from] FastError),
    /// The slow solver failed after the fast answer was rejected.
    #[error("slow phase failed: {source}")]
    Slow {
        fast: Box<FastPhase>,
        #[source]
        source: WorkflowError,
    },
}

impl HybridError {
    pub fn fast_phase(&self) -> Option<&FastPhase> {
        match self {
            HybridError::Slow { fast, .. } => Some(fast),
            HybridError::Fast(_) => None,
        }
    }

    pub fn workflow_error(&self) -> Option<&WorkflowError> {
        match self {
            HybridError::Slow { source, .. } => Some(source),
            HybridError::Fast(_) => None,
        }
    }
}

/// Routes problems through the fast thinker, escalating to the workflow engine.
#[derive(Debug, Clone)]
pub struct HybridController {
    fast: FastThinker,
    slow: WorkflowEngine,
}

impl HybridController {
    pub fn new(fast: FastThinker, slow: WorkflowEngine) -> Self {
        Self { fast, slow }
    }

    /// Both solvers on one gateway with default settings.
    pub fn from_gateway(gateway: Gateway, executor: Arc<dyn ToolExecutor>) -> Self {
        Self::new(FastThinker::new(gateway.clone()), WorkflowEngine::new(gateway, executor))
    }

    pub fn fast_thinker(&self) -> &FastThinker {
        &self.fast
    }

    pub fn engine(&self) -> &WorkflowEngine {
        &self.slow
    }

    /// Fast solve and verification only.
    pub fn fast_phase(&self, problem: &str) -> Result<FastPhase, FastError> {
        let solution = self.fast.solve(problem)?;
        let report = self.fast.verify(problem, &solution)?;
        Ok(FastPhase { solution, report })
    }

    pub fn solve(&self, problem: &str) -> Result<HybridOutcome, HybridError> {
        let fast = self.fast_phase(problem)?;
        if fast.passed() {
            tracing::debug!("fast answer verified");
            return Ok(HybridOutcome {
                mode_used: ModeUsed::Fast,
                answer: fast.solution.answer.clone(),
                usage: fast.usage(),
                fast,
                slow: None,
            });
        }
        tracing::info!(verdict = %fast.report.verdict.value, "fast answer rejected, escalating");
        match self.slow.solve_slow(problem) {
            Ok(slow) => Ok(HybridOutcome {
                mode_used: ModeUsed::Slow,
                answer: slow.final_answer.clone(),
                usage: fast.usage() + slow.total_usage(),
                fast,
                slow: Some(slow),
            }),
            Err(source) => Err(HybridError::Slow { fast: Box::new(fast), source }),
        }
    }
}

pub fn solve_hybrid(
    problem: &str,
    gateway: &Gateway,
    executor: Arc<dyn ToolExecutor>,
) -> Result<HybridOutcome, HybridError> {
    HybridController::from_gateway(gateway.clone(), executor).solve(problem)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeStats {
    pub fast_count: usize,
    pub slow_count: usize,
    /// `None` when there were no outcomes.
    pub fast_ratio: Option<f64>,
}

impl ModeStats {
    pub fn from_modes(modes: impl IntoIterator<Item = ModeUsed>) -> Self {
        let (mut fast_count, mut slow_count) = (0, 0);
        for m in modes {
            match m {
                ModeUsed::Fast => fast_count += 1,
                ModeUsed::Slow => slow_count += 1,
            }
        }
        let total = fast_count + slow_count;
        let fast_ratio = (total > 0).then(|| fast_count as f64 / total as f64);
        Self { fast_count, slow_count, fast_ratio }
    }

    pub fn slow_ratio(&self) -> Option<f64> {
        self.fast_ratio.map(|r| 1.0 - r)
    }
}

pub fn mode_ratio(outcomes: &[HybridOutcome]) -> ModeStats {
    ModeStats::from_modes(outcomes.iter().map(|o| o.mode_used))
}
