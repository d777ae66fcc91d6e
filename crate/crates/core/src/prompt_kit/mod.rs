//! Prompt templates and the parsers for everything the model writes back.
//!
//! The built-in catalog holds the reflection, expert design, expert execution,
//! verification and data synthesis prompts, plus the chain-of-thought,
//! code-repair and problem-writing prompts used around them. Templates use
//! `{name}` placeholders and render in a single pass.

mod blocks;
mod cards;
mod code;
mod template;
mod verdict;

use thiserror::Error;

pub use blocks::{extract_block, extract_block_or_whole, wrap_block, ParsedBlock};
pub use cards::{parse_expert_cards, scan_expert_cards, CardMatch, ExpertCard, ExpertType};
pub use code::{extract_code, PYTHON_CODE};
pub use template::{names, render, PromptCatalog, PromptTemplate};
pub use verdict::{
    parse_final_evaluation, parse_validity, ValidityVerdict, Verdict, VerdictValue, FINAL_EVALUATION, NEW_VALID_PROBLEM,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("no binding for placeholder {{{0}}}")]
    MissingBinding(String),
    #[error("unknown prompt template {0:?}")]
    UnknownTemplate(String),
    #[error("prompt io: {0}")]
    Io(String),
    #[error("block {0:?} not found")]
    BlockNotFound(String),
    #[error("no expert cards found")]
    NoCardsFound,
    #[error("malformed expert card at byte {position}: {reason}")]
    MalformedCard { position: usize, reason: String },
    #[error("reply contains no code")]
    EmptyCode,
}
