//! Solve trajectories as (query, answer) pairs, and their export as training rows.
//!
//! Every backend call made while solving is kept as an [`Exchange`] tagged with
//! its [`Stage`]. A [`TrajectoryRecord`] tags each exchange with the phase and
//! attempt it belongs to. Export keeps the pairs of the attempt that passed
//! verification, and the verification pairs of every attempt.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{ChatMessage, CompletionResult, Gateway, GatewayError, GenerationParams, TokenUsage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    FastSolve,
    FastVerify,
    Reflection,
    ExpertDesign,
    LlmExpert,
    ToolExpert,
    CodeRepair,
    Judgment,
}

impl Stage {
    /// Stages whose pairs teach the model to check a solution.
    pub fn is_verification(self) -> bool {
        matches!(self, Stage::FastVerify | Stage::Judgment)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::FastSolve => "fast_solve",
            Stage::FastVerify => "fast_verify",
            Stage::Reflection => "reflection",
            Stage::ExpertDesign => "expert_design",
            Stage::LlmExpert => "llm_expert",
            Stage::ToolExpert => "tool_expert",
            Stage::CodeRepair => "code_repair",
            Stage::Judgment => "judgment",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One backend call: what was asked and what came back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expert: Option<String>,
    pub query: String,
    pub answer: String,
    pub usage: TokenUsage,
    #[serde(default)]
    pub latency_ms: u64,
}

/// Flattens a conversation into the single query string stored in pairs.
pub fn flatten_messages(messages: &[ChatMessage]) -> String {
    if let [only] = messages {
        return only.content.clone();
    }
    messages.iter().map(|m| m.content.as_str()).collect::<Vec<_>>().join("\n\n")
}

/// Sends `messages` through the gateway and records the call as an exchange.
pub(crate) fn converse(
    gateway: &Gateway,
    params: &GenerationParams,
    messages: Vec<ChatMessage>,
    stage: Stage,
    expert: Option<&str>,
) -> Result<Exchange, GatewayError> {
    let query = flatten_messages(&messages);
    let CompletionResult { text, usage, latency_ms, .. } = gateway.complete(&params.request(messages))?;
    Ok(Exchange { stage, expert: expert.map(str::to_string), query, answer: text, usage, latency_ms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Fast,
    Slow,
    Hybrid,
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMode::Fast => "fast",
            SolveMode::Slow => "slow",
            SolveMode::Hybrid => "hybrid",
        })
    }
}

impl std::str::FromStr for SolveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fast" => Ok(SolveMode::Fast),
            "slow" => Ok(SolveMode::Slow),
            "hybrid" => Ok(SolveMode::Hybrid),
            other => Err(format!("unknown mode {other:?} (expected fast, slow or hybrid)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Fast,
    Slow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPair {
    pub phase: Phase,
    pub attempt: u32,
    #[serde(flatten)]
    pub exchange: Exchange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub problem_id: String,
    pub mode: SolveMode,
    pub pairs: Vec<TrajectoryPair>,
    pub final_answer: String,
    /// Whether the final answer passed verification (fast check or final judgment).
    pub verified: bool,
    /// Phase and attempt that produced `final_answer`.
    pub phase: Phase,
    pub attempt: u32,
}

impl TrajectoryRecord {
    pub fn usage(&self) -> TokenUsage {
        self.pairs.iter().map(|p| p.exchange.usage).sum()
    }

    /// Pairs eligible for training export.
    pub fn exportable_pairs(&self) -> impl Iterator<Item = &TrajectoryPair> {
        self.pairs.iter().filter(move |p| {
            p.exchange.stage.is_verification() || (self.verified && p.phase == self.phase && p.attempt == self.attempt)
        })
    }
}

/// Training row schema persisted as JSON lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub problem_id: String,
    pub stage: String,
    pub query: String,
    pub answer: String,
}

pub fn training_rows(records: &[TrajectoryRecord]) -> Vec<TrainingRow> {
    records
        .iter()
        .flat_map(|r| {
            r.exportable_pairs().map(|p| TrainingRow {
                problem_id: r.problem_id.clone(),
                stage: p.exchange.stage.as_str().to_string(),
                query: p.exchange.query.clone(),
                answer: p.exchange.answer.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("writing training rows failed: {0}")]
    SinkWriteFailed(#[from] std::io::Error),
}

/// Writes the exportable pairs of `records` to `sink` as JSON lines and
/// returns the number of rows written.
pub fn export_trajectories(records: &[TrajectoryRecord], sink: &mut impl Write) -> Result<usize, TrajectoryError> {
    let rows = training_rows(records);
    for row in &rows {
        serde_json::to_writer(&mut *sink, row).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(phase: Phase, attempt: u32, stage: Stage) -> TrajectoryPair {
        TrajectoryPair {
            phase,
            attempt,
            exchange: Exchange {
                stage,
                expert: None,
                query: format!("{stage} q{attempt}"),
                answer: format!("{stage} a{attempt}"),
                usage: TokenUsage::new(1, 1),
                latency_ms: 0,
            },
        }
    }

    fn record(verified: bool, attempt: u32, pairs: Vec<TrajectoryPair>) -> TrajectoryRecord {
        TrajectoryRecord {
            problem_id: "p".into(),
            mode: SolveMode::Slow,
            pairs,
            final_answer: "x".into(),
            verified,
            phase: Phase::Slow,
            attempt,
        }
    }

    #[test]
    fn verified_and_unverified_mix() {
        let verified = record(
            true,
            1,
            [Stage::Reflection, Stage::ExpertDesign, Stage::LlmExpert, Stage::Judgment]
                .map(|s| pair(Phase::Slow, 1, s))
                .to_vec(),
        );
        let failed = record(false, 1, vec![pair(Phase::Slow, 1, Stage::Judgment)]);
        let mut sink = Vec::new();
        assert_eq!(export_trajectories(&[verified, failed], &mut sink).unwrap(), 5);
        assert_eq!(String::from_utf8(sink).unwrap().lines().count(), 5);
    }

    #[test]
    fn empty_input() {
        let mut sink = Vec::new();
        assert_eq!(export_trajectories(&[], &mut sink).unwrap(), 0);
        assert!(sink.is_empty());
    }

    #[test]
    fn unverified_never_exports_solution_pairs() {
        let r = record(false, 2, [Stage::Reflection, Stage::LlmExpert].map(|s| pair(Phase::Slow, 2, s)).to_vec());
        assert!(training_rows(&[r]).is_empty());
    }

    #[test]
    fn sink_failure() {
        struct Broken;
        impl Write for Broken {
            fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
                Err(std::io::Error::other("disk full"))
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let r = record(true, 1, vec![pair(Phase::Slow, 1, Stage::Judgment)]);
        assert!(matches!(export_trajectories(&[r], &mut Broken), Err(TrajectoryError::SinkWriteFailed(_))));
    }
}
