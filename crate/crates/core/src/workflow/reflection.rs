use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::gateway::TokenUsage;
use crate::prompt_kit::extract_block;
use crate::trajectory::Exchange;

pub const PROBLEM_REFLECTION: &str = "Problem Reflection";

/// Words that mark a sub-task as something code can do well.
const TOOL_KEYWORDS: &[&str] = &[
    "python",
    "code",
    "coding",
    "program",
    "script",
    "function",
    "implement",
    "algorithm",
    "compute",
    "calculat",
    "simulat",
    "enumerat",
    "brute force",
    "dictionary",
    "regex",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubTask {
    pub index: usize,
    pub description: String,
    pub tool_suited: bool,
}

impl SubTask {
    pub fn new(index: usize, description: impl Into<String>) -> Self {
        let description = description.into();
        let tool_suited = is_tool_suited(&description);
        Self { index, description, tool_suited }
    }

    /// Bold lead-in (`**Title**: ...`) or the text before the first colon.
    pub fn title(&self) -> &str {
        let d = self.description.trim();
        if let Some(rest) = d.strip_prefix("**") {
            if let Some(end) = rest.find("**") {
                return rest[..end].trim().trim_end_matches(':').trim();
            }
        }
        match d.find(':') {
            Some(i) if i <= 80 => d[..i].trim(),
            _ => d,
        }
    }
}

pub fn is_tool_suited(text: &str) -> bool {
    let lower = text.to_lowercase();
    TOOL_KEYWORDS.iter().any(|k| lower.contains(k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemReflection {
    pub restatement: String,
    pub subtasks: Vec<SubTask>,
    /// Full reply text.
    pub raw: String,
    pub usage: TokenUsage,
    pub exchange: Option<Exchange>,
}

impl ProblemReflection {
    /// Text handed to later prompts: the reflection block payload when present.
    pub fn text(&self) -> String {
        reflection_payload(&self.raw)
    }
}

fn reflection_payload(raw: &str) -> String {
    extract_block(raw, PROBLEM_REFLECTION)
        .map(|b| b.payload.trim().to_string())
        .unwrap_or_else(|_| raw.trim().to_string())
}

fn item_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?m)(?:^|\s)(\d{1,2})[.)][ \t]+").unwrap())
}

fn subtask_heading_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?im)^.*sub-?\s*tasks?\b.*$").unwrap())
}

fn restatement_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?im)^\W*(?:task description|restatement|problem restatement|restated problem)\W*:\**[ \t]*(.*)$")
            .unwrap()
    })
}

/// Numbered items `1. .. 2. ..` in `text`, numbered consecutively from 1.
/// Items may sit on their own lines or run inline.
pub fn enumerate_items(text: &str) -> Vec<String> {
    let mut starts: Vec<(usize, usize)> = Vec::new();
    for caps in item_re().captures_iter(text) {
        let n: usize = caps[1].parse().unwrap_or(0);
        if n == starts.len() + 1 {
            let m = caps.get(0).unwrap();
            starts.push((m.start(), m.end()));
        }
    }
    starts
        .iter()
        .enumerate()
        .map(|(i, &(_, body))| {
            let end = starts.get(i + 1).map(|s| s.0).unwrap_or(text.len());
            text[body..end].trim().to_string()
        })
        .collect()
}

/// The part of the reflection that lists sub-tasks: everything after the
/// sub-task heading, up to the next bold heading line that is not an item.
fn subtask_region(payload: &str) -> &str {
    let Some(heading) = subtask_heading_re().find(payload) else { return payload };
    let rest = &payload[heading.end()..];
    let mut end = rest.len();
    let mut offset = 0;
    let mut seen_item = false;
    for line in rest.split_inclusive('\n') {
        let t = line.trim_start();
        if t.starts_with(|c: char| c.is_ascii_digit()) {
            seen_item = true;
        } else if seen_item && (t.starts_with("**") || t.starts_with('#')) {
            end = offset;
            break;
        }
        offset += line.len();
    }
    &rest[..end]
}

/// Parses a reflection reply. Returns `None` when no enumerated sub-task is found.
pub fn parse_reflection(raw: &str) -> Option<(String, Vec<SubTask>)> {
    let payload = reflection_payload(raw);
    let mut items = enumerate_items(subtask_region(&payload));
    if items.is_empty() {
        items = enumerate_items(&payload);
    }
    if items.is_empty() {
        return None;
    }
    let restatement = restatement_re()
        .captures(&payload)
        .map(|c| c[1].trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| payload.split("\n\n").next().unwrap_or("").trim().to_string());
    let subtasks = items.into_iter().enumerate().map(|(i, d)| SubTask::new(i + 1, d)).collect();
    Some((restatement, subtasks))
}
