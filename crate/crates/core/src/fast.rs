//! Fast thinking: one chain-of-thought call, then one step-wise verification call.

use std::sync::{Arc, OnceLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{ChatMessage, Gateway, GatewayError, GenerationParams, TokenUsage};
use crate::prompt_kit::{extract_block, names, parse_final_evaluation, PromptCatalog, PromptError, Verdict};
use crate::trajectory::{converse, Exchange, Stage};

pub const FINAL_ANSWER: &str = "Final Answer";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastSolution {
    pub rationale: String,
    pub answer: String,
    pub usage: TokenUsage,
    pub exchange: Exchange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub flagged_steps: Vec<String>,
    pub raw: String,
    pub usage: TokenUsage,
    pub exchange: Exchange,
}

#[derive(Debug, Error)]
pub enum FastError {
    #[error("problem statement is empty")]
    EmptyProblem,
    #[error("no answer could be extracted from the reply")]
    EmptyAnswer,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

fn final_answer_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?im)^.*?\bfinal answer\b\W*?:[ \t]*(.*)$").unwrap())
}

fn clean(s: &str) -> String {
    s.trim().trim_matches(|c| c == '*' || c == '`').trim().to_string()
}

/// Splits a chain-of-thought reply into (rationale, answer).
///
/// The answer is the `Final Answer` block when present, else the text after
/// the last `Final Answer:` label (or the next non-empty line when the label
/// stands alone), else the last non-empty line.
pub fn split_answer(reply: &str) -> Option<(String, String)> {
    if let Ok(block) = extract_block(reply, FINAL_ANSWER) {
        let answer = clean(&block.payload);
        if !answer.is_empty() {
            let cut = reply.to_ascii_lowercase().rfind("final answer start").unwrap_or(reply.len());
            let head = reply[..cut].trim_end().trim_end_matches('#').trim_end();
            return Some((head.to_string(), answer));
        }
    }
    if let Some(caps) = final_answer_line_re().captures_iter(reply).last() {
        let whole = caps.get(0).unwrap();
        let inline = clean(&caps[1]);
        let answer = if inline.is_empty() {
            reply[whole.end()..].lines().map(clean).find(|l| !l.is_empty()).unwrap_or_default()
        } else {
            inline
        };
        if !answer.is_empty() {
            return Some((reply[..whole.start()].trim_end().to_string(), answer));
        }
    }
    let lines: Vec<&str> = reply.lines().collect();
    let idx = lines.iter().rposition(|l| !l.trim().is_empty())?;
    let answer = clean(lines[idx]);
    if answer.is_empty() {
        return None;
    }
    Some((lines[..idx].join("\n").trim_end().to_string(), answer))
}

fn step_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^[\s>*_-]*(?:\*\*)?step\s*\d+").unwrap())
}

const NEGATIVE_CUES: &[&str] = &[
    "wrong",
    "incorrect",
    "error",
    "invalid",
    "mistake",
    "miscalculat",
    "fails",
    "flaw",
    "doubt",
    "contradict",
    "unsupported",
    "not correct",
    "does not",
    "doesn't",
    "should be",
];

/// Lines of a verification reply that start with a step index and criticise it.
pub fn flagged_steps(reply: &str) -> Vec<String> {
    reply
        .lines()
        .map(str::trim)
        .filter(|l| step_line_re().is_match(l))
        .filter(|l| {
            let lower = l.to_ascii_lowercase();
            NEGATIVE_CUES.iter().any(|c| lower.contains(c))
        })
        .map(str::to_string)
        .collect()
}

/// Chain-of-thought solver with self-verification.
#[derive(Debug, Clone)]
pub struct FastThinker {
    gateway: Gateway,
    catalog: Arc<PromptCatalog>,
    params: GenerationParams,
}

impl FastThinker {
    pub fn new(gateway: Gateway) -> Self {
        Self { gateway, catalog: Arc::new(PromptCatalog::builtin()), params: GenerationParams::default() }
    }

    pub fn with_catalog(mut self, catalog: Arc<PromptCatalog>) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn with_params(mut self, params: GenerationParams) -> Self {
        self.params = params;
        self
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    /// One backend call: rationale plus final answer.
    pub fn solve(&self, problem: &str) -> Result<FastSolution, FastError> {
        if problem.trim().is_empty() {
            return Err(FastError::EmptyProblem);
        }
        let prompt = self.catalog.render(names::COT_SOLVE, &[("task_problem", problem)])?;
        let exchange = converse(&self.gateway, &self.params, vec![ChatMessage::user(prompt)], Stage::FastSolve, None)?;
        let (rationale, answer) = split_answer(&exchange.answer).ok_or(FastError::EmptyAnswer)?;
        Ok(FastSolution { rationale, answer, usage: exchange.usage, exchange })
    }

    /// One backend call examining every step of `solution`.
    pub fn verify(&self, problem: &str, solution: &FastSolution) -> Result<VerificationReport, FastError> {
        let prompt = self
            .catalog
            .render(names::COT_VERIFICATION, &[("task_problem", problem), ("solution", &solution.exchange.answer)])?;
        let exchange = converse(&self.gateway, &self.params, vec![ChatMessage::user(prompt)], Stage::FastVerify, None)?;
        let verdict = parse_final_evaluation(&exchange.answer);
        let flagged = if verdict.is_yes() { Vec::new() } else { flagged_steps(&exchange.answer) };
        Ok(VerificationReport {
            verdict,
            flagged_steps: flagged,
            raw: exchange.answer.clone(),
            usage: exchange.usage,
            exchange,
        })
    }
}

pub fn solve_fast(problem: &str, gateway: &Gateway) -> Result<FastSolution, FastError> {
    FastThinker::new(gateway.clone()).solve(problem)
}

pub fn verify_fast(problem: &str, solution: &FastSolution, gateway: &Gateway) -> Result<VerificationReport, FastError> {
    FastThinker::new(gateway.clone()).verify(problem, solution)
}
