use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::PromptError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExpertType {
    #[serde(rename = "LLM")]
    Llm,
    Tool,
}

impl ExpertType {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "llm" => Some(ExpertType::Llm),
            "tool" => Some(ExpertType::Tool),
            _ => None,
        }
    }
}

impl fmt::Display for ExpertType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExpertType::Llm => "LLM",
            ExpertType::Tool => "Tool",
        })
    }
}

/// The JSON name card that closes every expert description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpertCard {
    pub name: String,
    pub expert_type: ExpertType,
    pub input_type: String,
    pub output_type: String,
}

impl ExpertCard {
    pub fn new(name: impl Into<String>, expert_type: ExpertType) -> Self {
        Self { name: name.into(), expert_type, input_type: "str".into(), output_type: "str".into() }
    }

    /// Renders the card in the same JSON shape the design prompt asks for.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "Name": self.name,
            "Expert_Type": self.expert_type.to_string(),
            "Input_Type": self.input_type,
            "Output_Type": self.output_type,
        })
        .to_string()
    }
}

/// A card together with the byte span of its JSON object in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardMatch {
    pub card: ExpertCard,
    pub span: Range<usize>,
}

const CARD_KEYS: [&str; 4] = ["name", "experttype", "inputtype", "outputtype"];

fn normalize_key(k: &str) -> String {
    k.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

/// Byte ranges of every top-level brace-balanced `{...}` in `text`.
/// Braces inside double-quoted strings are ignored.
pub(crate) fn balanced_objects(text: &str) -> Vec<Range<usize>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate() {
        if depth > 0 && in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' if depth > 0 => in_string = true,
            b'{' => {
                if depth == 0 {
                    start = i;
                }
                depth += 1;
            }
            b'}' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    out.push(start..i + 1);
                }
            }
            _ => {}
        }
    }
    out
}

/// Turns a single-quoted JSON-like object into JSON by swapping quote styles
/// outside of double-quoted strings.
fn normalize_quotes(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_double = false;
    let mut in_single = false;
    let mut escaped = false;
    for c in s.chars() {
        if escaped {
            out.push(c);
            escaped = false;
            continue;
        }
        match c {
            '\\' => {
                escaped = true;
                out.push(c);
            }
            '"' if !in_single => {
                in_double = !in_double;
                out.push(c);
            }
            '"' if in_single => out.push_str("\\\""),
            '\'' if !in_double => {
                in_single = !in_single;
                out.push('"');
            }
            _ => out.push(c),
        }
    }
    out
}

fn parse_object(raw: &str) -> Option<Map<String, Value>> {
    let parsed = serde_json::from_str::<Value>(raw)
        .ok()
        .or_else(|| serde_json::from_str::<Value>(&normalize_quotes(raw)).ok())?;
    match parsed {
        Value::Object(map) => Some(map),
        _ => None,
    }
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "None".into(),
        other => other.to_string(),
    }
}

/// Whether a raw object mentions any card key, judged textually so that
/// objects which fail to parse as JSON are still recognized as cards.
fn looks_like_card(raw: &str) -> bool {
    let flat = normalize_key(raw);
    ["experttype", "inputtype", "outputtype"].iter().any(|k| flat.contains(k))
        || raw.to_ascii_lowercase().contains("\"name\"")
        || raw.to_ascii_lowercase().contains("'name'")
}

fn card_from_map(map: &Map<String, Value>) -> Result<ExpertCard, String> {
    let mut fields: [Option<String>; 4] = Default::default();
    for (k, v) in map {
        if let Some(idx) = CARD_KEYS.iter().position(|ck| *ck == normalize_key(k)) {
            fields[idx] = Some(value_text(v));
        }
    }
    let [name, expert_type, input_type, output_type] = fields;
    let name = name.map(|n| n.trim().to_string()).filter(|n| !n.is_empty()).ok_or("missing Name")?;
    let raw_type = expert_type.ok_or("missing Expert_Type")?;
    let expert_type = ExpertType::parse(&raw_type).ok_or_else(|| format!("unknown expert type {raw_type:?}"))?;
    Ok(ExpertCard {
        name,
        expert_type,
        input_type: input_type.unwrap_or_else(|| "None".into()),
        output_type: output_type.unwrap_or_else(|| "None".into()),
    })
}

/// Finds every expert card in `text`, in document order, with source spans.
///
/// Balanced objects that carry none of the card keys (for example a JSON
/// dictionary that an expert emitted as data) are skipped. Objects that do
/// carry card keys but lack a name, or have an expert type other than
/// `LLM`/`Tool`, or cannot be parsed even after quote normalization, are
/// reported as [`PromptError::MalformedCard`] with their byte offset.
pub fn scan_expert_cards(text: &str) -> Result<Vec<CardMatch>, PromptError> {
    let mut cards = Vec::new();
    for span in balanced_objects(text) {
        let raw = &text[span.clone()];
        if !looks_like_card(raw) {
            continue;
        }
        let map = parse_object(raw)
            .ok_or_else(|| PromptError::MalformedCard { position: span.start, reason: "not valid JSON".into() })?;
        let card = card_from_map(&map).map_err(|reason| PromptError::MalformedCard { position: span.start, reason })?;
        cards.push(CardMatch { card, span });
    }
    if cards.is_empty() {
        return Err(PromptError::NoCardsFound);
    }
    Ok(cards)
}

pub fn parse_expert_cards(text: &str) -> Result<Vec<ExpertCard>, PromptError> {
    Ok(scan_expert_cards(text)?.into_iter().map(|m| m.card).collect())
}
