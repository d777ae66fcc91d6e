use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, BackendReply, CompletionRequest, GatewayError, TokenUsage};

/// Predicate over the final user message of a request.
#[derive(Clone)]
pub enum Matcher {
    Any,
    Contains(String),
    AllOf(Vec<String>),
    Predicate(Arc<dyn Fn(&str) -> bool + Send + Sync>),
}

impl Matcher {
    pub fn contains(needle: impl Into<String>) -> Self {
        Matcher::Contains(needle.into())
    }

    pub fn all_of<I, S>(needles: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Matcher::AllOf(needles.into_iter().map(Into::into).collect())
    }

    pub fn predicate(f: impl Fn(&str) -> bool + Send + Sync + 'static) -> Self {
        Matcher::Predicate(Arc::new(f))
    }

    pub fn accepts(&self, message: &str) -> bool {
        match self {
            Matcher::Any => true,
            Matcher::Contains(needle) => message.contains(needle.as_str()),
            Matcher::AllOf(needles) => needles.iter().all(|n| message.contains(n.as_str())),
            Matcher::Predicate(f) => f(message),
        }
    }
}

impl fmt::Debug for Matcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Matcher::Any => write!(f, "Any"),
            Matcher::Contains(s) => write!(f, "Contains({s:?})"),
            Matcher::AllOf(v) => write!(f, "AllOf({v:?})"),
            Matcher::Predicate(_) => write!(f, "Predicate(..)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScriptReply {
    Text(String),
    TransientFailure(String),
    FatalFailure(String),
}

#[derive(Debug, Clone)]
pub struct ScriptEntry {
    pub matcher: Matcher,
    pub reply: ScriptReply,
    /// One-shot entries are consumed by the first request they answer.
    pub once: bool,
}

impl ScriptEntry {
    pub fn new(matcher: Matcher, reply: impl Into<String>) -> Self {
        Self { matcher, reply: ScriptReply::Text(reply.into()), once: false }
    }

    pub fn once(matcher: Matcher, reply: impl Into<String>) -> Self {
        Self { matcher, reply: ScriptReply::Text(reply.into()), once: true }
    }

    pub fn transient_failure(matcher: Matcher) -> Self {
        Self { matcher, reply: ScriptReply::TransientFailure("scripted transient failure".into()), once: true }
    }
}

/// On-disk form of a script entry, used by the CLI's `mock` backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptFileEntry {
    /// Every listed substring must occur in the final user message. Empty matches anything.
    #[serde(default)]
    pub contains: Vec<String>,
    pub reply: String,
    #[serde(default)]
    pub once: bool,
}

impl From<ScriptFileEntry> for ScriptEntry {
    fn from(e: ScriptFileEntry) -> Self {
        let matcher = if e.contains.is_empty() { Matcher::Any } else { Matcher::AllOf(e.contains) };
        ScriptEntry { matcher, reply: ScriptReply::Text(e.reply), once: e.once }
    }
}

#[derive(Debug)]
struct Slot {
    entry: ScriptEntry,
    consumed: bool,
}

/// Deterministic test double answering from an ordered script.
///
/// Each request is answered by the first unconsumed entry whose matcher
/// accepts the final user message. Usage is reported as one token per four
/// characters of prompt and reply so fixtures have stable, nonzero costs.
#[derive(Debug)]
pub struct ScriptedBackend {
    id: String,
    slots: Mutex<Vec<Slot>>,
    log: Mutex<Vec<CompletionRequest>>,
}

impl ScriptedBackend {
    pub fn new(script: Vec<ScriptEntry>) -> Result<Self, GatewayError> {
        if script.is_empty() {
            return Err(GatewayError::InvalidRequest("script must not be empty".into()));
        }
        Ok(Self {
            id: "scripted".into(),
            slots: Mutex::new(script.into_iter().map(|entry| Slot { entry, consumed: false }).collect()),
            log: Mutex::new(Vec::new()),
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn from_file_entries(entries: Vec<ScriptFileEntry>) -> Result<Self, GatewayError> {
        Self::new(entries.into_iter().map(Into::into).collect())
    }

    /// Every request received so far, including ones that failed to match.
    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.log.lock().expect("script log poisoned").clone()
    }

    /// Final user message of every request received so far.
    pub fn prompts(&self) -> Vec<String> {
        self.requests().iter().map(|r| r.last_user_message().unwrap_or_default().to_string()).collect()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().expect("script log poisoned").len()
    }

    /// Number of one-shot entries not yet consumed.
    pub fn pending_one_shots(&self) -> usize {
        self.slots.lock().expect("script poisoned").iter().filter(|s| s.entry.once && !s.consumed).count()
    }
}

impl Backend for ScriptedBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn send(&self, request: &CompletionRequest) -> Result<BackendReply, BackendError> {
        let message = request.last_user_message().unwrap_or_default();
        // Hold the slot lock across log + lookup so concurrent callers consume in a single order.
        let mut slots = self.slots.lock().expect("script poisoned");
        self.log.lock().expect("script log poisoned").push(request.clone());

        let slot = slots
            .iter_mut()
            .find(|s| !s.consumed && s.entry.matcher.accepts(message))
            .ok_or_else(|| BackendError::NoScriptMatch(preview(message)))?;
        if slot.entry.once {
            slot.consumed = true;
        }
        match &slot.entry.reply {
            ScriptReply::Text(text) => Ok(BackendReply {
                text: text.clone(),
                usage: Some(TokenUsage::estimate(request.prompt_chars(), text.chars().count())),
            }),
            ScriptReply::TransientFailure(msg) => Err(BackendError::Transient(msg.clone())),
            ScriptReply::FatalFailure(msg) => Err(BackendError::Fatal(msg.clone())),
        }
    }
}

fn preview(message: &str) -> String {
    let mut p: String = message.chars().take(80).collect();
    if message.chars().count() > 80 {
        p.push('…');
    }
    p
}

/// Builds a scripted backend from `(matcher, reply)` pairs; every entry is reusable.
pub fn make_scripted_backend<I, R>(script: I) -> Result<ScriptedBackend, GatewayError>
where
    I: IntoIterator<Item = (Matcher, R)>,
    R: Into<String>,
{
    ScriptedBackend::new(script.into_iter().map(|(m, r)| ScriptEntry::new(m, r)).collect())
}
