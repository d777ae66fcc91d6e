use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::blocks::extract_block;

pub const FINAL_EVALUATION: &str = "FINAL EVALUATION";
pub const NEW_VALID_PROBLEM: &str = "New Valid Problem";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictValue {
    Yes,
    No,
    Unparseable,
}

impl fmt::Display for VerdictValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictValue::Yes => "yes",
            VerdictValue::No => "no",
            VerdictValue::Unparseable => "unparseable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: VerdictValue,
    /// The text the value was read from: the matched token span, or the
    /// reply's last non-empty line when nothing matched.
    pub raw: String,
}

impl Verdict {
    pub fn yes(raw: impl Into<String>) -> Self {
        Self { value: VerdictValue::Yes, raw: raw.into() }
    }

    pub fn no(raw: impl Into<String>) -> Self {
        Self { value: VerdictValue::No, raw: raw.into() }
    }

    fn unparseable(text: &str) -> Self {
        let last = text.lines().rev().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
        Self { value: VerdictValue::Unparseable, raw: last.to_string() }
    }

    pub fn is_yes(&self) -> bool {
        self.value == VerdictValue::Yes
    }
}

/// Words directly before byte offset `end`, most recent last.
fn trailing_words(text: &str, end: usize, n: usize) -> Option<(usize, String)> {
    let head = text[..end].trim_end_matches(['*', '_', ' ', '\t']);
    let mut words = Vec::with_capacity(n);
    let mut start = head.len();
    let mut rest = head;
    for _ in 0..n {
        rest = rest.trim_end();
        let idx =
            rest.char_indices().rev().find(|(_, c)| c.is_whitespace()).map(|(i, c)| i + c.len_utf8()).unwrap_or(0);
        let word = &rest[idx..];
        if word.is_empty() {
            return None;
        }
        words.push(word);
        start = idx;
        rest = &rest[..idx];
    }
    words.reverse();
    let joined = words
        .iter()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_ascii_uppercase())
        .collect::<Vec<_>>()
        .join(" ");
    Some((start, joined))
}

/// Reads the verdict from the last `FINAL EVALUATION: YES|NO` in `text`.
///
/// The keyword matches case-insensitively and within an optimal string
/// alignment distance of 1, so a single typo or adjacent transposition
/// (`FINAL EVALAUTION`) is still recognized. Markdown emphasis and quotes
/// around the keyword and the answer token are skipped.
pub fn parse_final_evaluation(text: &str) -> Verdict {
    let mut last: Option<(usize, usize)> = None;
    for (i, _) in text.match_indices(':') {
        let Some((start, words)) = trailing_words(text, i, 2) else { continue };
        if strsim::osa_distance(&words, FINAL_EVALUATION) <= 1 {
            last = Some((start, i));
        }
    }
    let Some((start, colon)) = last else { return Verdict::unparseable(text) };
    let after = text[colon + 1..].trim_start_matches(|c: char| c.is_whitespace() || "*_'\"`".contains(c));
    let token: String = after.chars().take_while(char::is_ascii_alphabetic).collect();
    let raw_end = colon + 1 + (text[colon + 1..].len() - after.len()) + token.len();
    let raw = text[start..raw_end].to_string();
    match token.to_ascii_uppercase().as_str() {
        "YES" => Verdict::yes(raw),
        "NO" => Verdict::no(raw),
        _ => Verdict::unparseable(text),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityVerdict {
    pub verdict: Verdict,
    /// Payload of a `New Valid Problem` block, when the reply carries one.
    pub rewrite: Option<String>,
}

fn validity_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)##\s*(in)?valid\s*##").unwrap())
}

/// Reads a `## VALID ##` / `## INVALID ##` decision. Tokens match as whole
/// units, and any `INVALID` wins over `VALID`.
pub fn parse_validity(text: &str) -> ValidityVerdict {
    let mut valid = None;
    let mut invalid = None;
    for m in validity_re().captures_iter(text) {
        let span = m.get(0).unwrap().as_str().to_string();
        if m.get(1).is_some() {
            invalid = Some(span);
        } else if valid.is_none() {
            valid = Some(span);
        }
    }
    let verdict = match (invalid, valid) {
        (Some(raw), _) => Verdict::no(raw),
        (None, Some(raw)) => Verdict::yes(raw),
        (None, None) => Verdict::unparseable(text),
    };
    let rewrite =
        extract_block(text, NEW_VALID_PROBLEM).ok().map(|b| b.payload.trim().to_string()).filter(|p| !p.is_empty());
    ValidityVerdict { verdict, rewrite }
}
