use super::blocks::extract_block;
use super::PromptError;

pub const PYTHON_CODE: &str = "Python Code";
const FENCE: &str = "```";

/// Drops the language tag line that follows an opening fence.
fn after_open_fence(s: &str) -> &str {
    match s.find('\n') {
        Some(nl) if !s[..nl].trim().contains(char::is_whitespace) => &s[nl + 1..],
        _ => s,
    }
}

/// Pulls executable code out of a model reply.
///
/// In order of preference: the first fenced block (language tag removed),
/// a `### Python Code Start ###` block, text before a lone closing fence
/// (replies to prompts that already opened the fence), or the whole reply.
pub fn extract_code(text: &str) -> Result<String, PromptError> {
    let fences: Vec<usize> = text.match_indices(FENCE).map(|(i, _)| i).collect();
    let code = if fences.len() >= 2 {
        let body = after_open_fence(&text[fences[0] + FENCE.len()..fences[1]]);
        body.to_string()
    } else if let Ok(block) = extract_block(text, PYTHON_CODE) {
        block.payload
    } else if let [only] = fences[..] {
        if text[..only].trim().is_empty() {
            after_open_fence(&text[only + FENCE.len()..]).to_string()
        } else {
            text[..only].to_string()
        }
    } else {
        text.to_string()
    };
    let code = code.trim_matches(|c| c == '\n' || c == '\r').trim_end();
    if code.trim().is_empty() {
        return Err(PromptError::EmptyCode);
    }
    Ok(code.to_string())
}
