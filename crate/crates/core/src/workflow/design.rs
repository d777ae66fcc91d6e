use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::WorkflowError;
use crate::gateway::TokenUsage;
use crate::prompt_kit::{extract_block, scan_expert_cards, ExpertCard, ExpertType, PromptError};
use crate::trajectory::Exchange;

pub const EXPERTS_DESIGN: &str = "Specialized Experts Design";
pub const DEFAULT_REVIEWER: &str = "Final Review Expert";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertSpec {
    pub card: ExpertCard,
    pub description: String,
}

impl ExpertSpec {
    pub fn new(card: ExpertCard, description: impl Into<String>) -> Self {
        Self { card, description: description.into() }
    }

    pub fn name(&self) -> &str {
        &self.card.name
    }

    pub fn is_tool(&self) -> bool {
        self.card.expert_type == ExpertType::Tool
    }

    /// The reviewer appended when a design does not end with an LLM expert.
    pub fn default_reviewer(name: &str) -> Self {
        let mut card = ExpertCard::new(name, ExpertType::Llm);
        card.input_type = "str".into();
        card.output_type = "str".into();
        Self::new(
            card,
            "Reviews the results of all previous experts, checks them against the problem statement, \
             and states the final answer to the problem.",
        )
    }

    /// Description followed by the JSON card, the way designs are written.
    pub fn render(&self) -> String {
        format!("**{}**: {} Expert card (in JSON format): {}", self.card.name, self.description, self.card.to_json())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertDesign {
    pub experts: Vec<ExpertSpec>,
    /// Design text handed to later prompts, including any appended reviewer.
    pub text: String,
    pub raw: String,
    /// True when a default reviewer had to be appended.
    pub appended_reviewer: bool,
    pub usage: TokenUsage,
    pub exchange: Option<Exchange>,
}

fn card_label_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)[\s(]*(?:expert\s+)?(?:name\s+)?card\b[^:\n]{0,40}:?\s*$").unwrap())
}

/// Payload of the design block, or the whole reply.
pub fn design_payload(raw: &str) -> String {
    extract_block(raw, EXPERTS_DESIGN).map(|b| b.payload.trim().to_string()).unwrap_or_else(|_| raw.trim().to_string())
}

/// Experts in document order, each with the prose that precedes its card.
pub fn parse_design(text: &str) -> Result<Vec<ExpertSpec>, PromptError> {
    let matches = scan_expert_cards(text)?;
    let mut prev_end = 0;
    let mut experts = Vec::with_capacity(matches.len());
    for m in matches {
        let prose = text[prev_end..m.span.start].trim();
        let prose = card_label_re().replace(prose, "");
        let prose = prose.trim().trim_start_matches("- ").trim();
        let description = if prose.is_empty() { m.card.name.clone() } else { prose.to_string() };
        prev_end = m.span.end;
        experts.push(ExpertSpec::new(m.card, description));
    }
    Ok(experts)
}

/// Rejects duplicate names (compared case-insensitively).
pub fn ensure_unique(experts: &[ExpertSpec]) -> Result<(), WorkflowError> {
    let mut seen = HashSet::new();
    for e in experts {
        if !seen.insert(e.card.name.trim().to_lowercase()) {
            return Err(WorkflowError::DuplicateExpertName(e.card.name.clone()));
        }
    }
    Ok(())
}

/// Appends a default reviewer when the last expert is not LLM-typed.
/// Returns the appended spec, if any.
pub fn ensure_final_reviewer(experts: &mut Vec<ExpertSpec>) -> Option<ExpertSpec> {
    if experts.last().is_some_and(|e| e.card.expert_type == ExpertType::Llm) {
        return None;
    }
    let taken: HashSet<String> = experts.iter().map(|e| e.card.name.to_lowercase()).collect();
    let name = std::iter::once(DEFAULT_REVIEWER.to_string())
        .chain((2..).map(|i| format!("{DEFAULT_REVIEWER} {i}")))
        .find(|n| !taken.contains(&n.to_lowercase()))
        .expect("unbounded name supply");
    let reviewer = ExpertSpec::default_reviewer(&name);
    experts.push(reviewer.clone());
    Some(reviewer)
}

/// Ordered expert chain with edges `i -> i+1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkflowGraph {
    pub experts: Vec<ExpertSpec>,
    pub edges: Vec<(usize, usize)>,
}

impl WorkflowGraph {
    pub fn len(&self) -> usize {
        self.experts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experts.is_empty()
    }

    /// Topological order; for a chain this is the input order.
    pub fn order(&self) -> Vec<usize> {
        (0..self.experts.len()).collect()
    }

    pub fn final_expert(&self) -> &ExpertSpec {
        self.experts.last().expect("graphs are never empty")
    }

    /// Checks every structural invariant of a chain workflow.
    pub fn validate(&self) -> Result<(), WorkflowError> {
        let invalid = |r: &str| Err(WorkflowError::InvalidGraph(r.to_string()));
        if self.experts.is_empty() {
            return invalid("empty workflow");
        }
        ensure_unique(&self.experts).or_else(|e| invalid(&e.to_string()))?;
        if self.final_expert().card.expert_type != ExpertType::Llm {
            return invalid("final expert must be LLM-typed");
        }
        let chain: Vec<(usize, usize)> = (1..self.experts.len()).map(|i| (i - 1, i)).collect();
        if self.edges != chain {
            return invalid("edges must form the chain i -> i+1");
        }
        Ok(())
    }
}

pub fn build_workflow(experts: Vec<ExpertSpec>) -> Result<WorkflowGraph, WorkflowError> {
    let edges = (1..experts.len()).map(|i| (i - 1, i)).collect();
    let graph = WorkflowGraph { experts, edges };
    graph.validate()?;
    Ok(graph)
}
