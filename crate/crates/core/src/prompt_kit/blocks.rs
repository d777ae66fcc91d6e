use regex::Regex;
use serde::{Deserialize, Serialize};

use super::PromptError;

/// Payload found between `### <name> Start ###` and `### <name> End ###`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedBlock {
    pub name: String,
    pub payload: String,
    /// False when the start marker had no matching end marker.
    pub complete: bool,
}

fn marker_re(name: &str, edge: &str) -> Regex {
    let words: Vec<String> = name.split_whitespace().map(regex::escape).collect();
    Regex::new(&format!(r"(?i)#{{3}}\s*{}\s+{}\s*#{{3}}", words.join(r"\s+"), edge)).expect("marker pattern is valid")
}

/// Formats `payload` as a marker-delimited block.
pub fn wrap_block(name: &str, payload: &str) -> String {
    format!("### {name} Start ###\n{payload}\n### {name} End ###")
}

/// Extracts the last block named `name` from `text`.
///
/// Markers match case-insensitively and tolerate arbitrary whitespace
/// (including line breaks) between `###`, the name words and `Start`/`End`.
/// The newline directly after the start marker and directly before the end
/// marker belong to the markers, not the payload.
pub fn extract_block(text: &str, name: &str) -> Result<ParsedBlock, PromptError> {
    let start =
        marker_re(name, "start").find_iter(text).last().ok_or_else(|| PromptError::BlockNotFound(name.to_string()))?;
    let rest = &text[start.end()..];
    let rest = strip_leading_line_break(rest);

    match marker_re(name, "end").find(rest) {
        Some(end) => Ok(ParsedBlock {
            name: name.to_string(),
            payload: strip_trailing_line_break(&rest[..end.start()]).to_string(),
            complete: true,
        }),
        None => Ok(ParsedBlock { name: name.to_string(), payload: rest.trim_end().to_string(), complete: false }),
    }
}

/// Like [`extract_block`] but falls back to the whole text (trimmed, flagged
/// incomplete) when the block is missing.
pub fn extract_block_or_whole(text: &str, name: &str) -> ParsedBlock {
    extract_block(text, name).unwrap_or_else(|_| ParsedBlock {
        name: name.to_string(),
        payload: text.trim().to_string(),
        complete: false,
    })
}

fn strip_leading_line_break(s: &str) -> &str {
    let t = s.trim_start_matches([' ', '\t']);
    t.strip_prefix("\r\n").or_else(|| t.strip_prefix('\n')).unwrap_or(s)
}

fn strip_trailing_line_break(s: &str) -> &str {
    let t = s.trim_end_matches([' ', '\t']);
    t.strip_suffix("\r\n").or_else(|| t.strip_suffix('\n')).unwrap_or(s)
}
