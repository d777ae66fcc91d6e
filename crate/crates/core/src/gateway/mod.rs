//! Uniform access to text-completion backends.
//!
//! A [`Backend`] performs one raw request. The [`Gateway`] wraps a backend
//! with request validation, retry with exponential backoff for transient
//! failures, latency measurement and a running usage ledger, so that the
//! aggregate usage it reports is always the exact componentwise sum of the
//! per-call usages it handed out.

mod http;
mod scripted;

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::{HttpBackend, HttpBackendConfig, DEFAULT_API_KEY_ENV};
pub use scripted::{make_scripted_backend, Matcher, ScriptEntry, ScriptFileEntry, ScriptReply, ScriptedBackend};

pub const DEFAULT_MAX_NEW_TOKENS: u32 = 2048;
pub const DEFAULT_SOLVE_TEMPERATURE: f32 = 0.0;
pub const DEFAULT_SYNTH_TEMPERATURE: f32 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f32,
    pub max_new_tokens: u32,
    #[serde(default)]
    pub stop: Vec<String>,
}

impl CompletionRequest {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.messages.is_empty() {
            return Err(GatewayError::InvalidRequest("messages must not be empty".into()));
        }
        if let Some(m) = self.messages.iter().find(|m| m.role != Role::System && m.content.is_empty()) {
            return Err(GatewayError::InvalidRequest(format!("empty content in a {:?} message", m.role)));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidRequest(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        if self.max_new_tokens == 0 {
            return Err(GatewayError::InvalidRequest("max_new_tokens must be at least 1".into()));
        }
        Ok(())
    }

    /// Content of the last user message, the text scripted matchers look at.
    pub fn last_user_message(&self) -> Option<&str> {
        self.messages.iter().rev().find(|m| m.role == Role::User).map(|m| m.content.as_str())
    }

    pub fn prompt_chars(&self) -> usize {
        self.messages.iter().map(|m| m.content.chars().count()).sum()
    }
}

/// Prompt/completion token counts. Addition is componentwise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt: u64,
    pub completion: u64,
    pub total: u64,
}

impl TokenUsage {
    pub const ZERO: TokenUsage = TokenUsage { prompt: 0, completion: 0, total: 0 };

    pub fn new(prompt: u64, completion: u64) -> Self {
        Self { prompt, completion, total: prompt + completion }
    }

    /// Fallback when a backend reports nothing: one token per four characters.
    pub fn estimate(prompt_chars: usize, completion_chars: usize) -> Self {
        Self::new(estimate_tokens(prompt_chars), estimate_tokens(completion_chars))
    }

    pub fn accumulate(self, other: TokenUsage) -> TokenUsage {
        self + other
    }

    pub fn is_consistent(&self) -> bool {
        self.total == self.prompt + self.completion
    }
}

pub fn estimate_tokens(chars: usize) -> u64 {
    (chars as u64).div_ceil(4)
}

impl Add for TokenUsage {
    type Output = TokenUsage;

    fn add(self, rhs: TokenUsage) -> TokenUsage {
        TokenUsage {
            prompt: self.prompt + rhs.prompt,
            completion: self.completion + rhs.completion,
            total: self.total + rhs.total,
        }
    }
}

impl AddAssign for TokenUsage {
    fn add_assign(&mut self, rhs: TokenUsage) {
        *self = *self + rhs;
    }
}

impl Sum for TokenUsage {
    fn sum<I: Iterator<Item = TokenUsage>>(iter: I) -> Self {
        iter.fold(TokenUsage::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a TokenUsage> for TokenUsage {
    fn sum<I: Iterator<Item = &'a TokenUsage>>(iter: I) -> Self {
        iter.copied().sum()
    }
}

impl fmt::Display for TokenUsage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} prompt + {} completion = {}", self.prompt, self.completion, self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub usage: TokenUsage,
    pub latency_ms: u64,
    pub backend_id: String,
    /// True when `usage` was estimated from character counts.
    #[serde(default)]
    pub usage_estimated: bool,
}

/// What a backend hands back for a single successful request.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendReply {
    pub text: String,
    pub usage: Option<TokenUsage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    /// Worth retrying: timeouts, connection resets, 429 and 5xx responses.
    #[error("transient backend failure: {0}")]
    Transient(String),
    #[error("backend failure: {0}")]
    Fatal(String),
    #[error("credential environment variable {0} is not set")]
    AuthMissing(String),
    #[error("no script entry matches the request: {0}")]
    NoScriptMatch(String),
}

impl BackendError {
    pub fn is_transient(&self) -> bool {
        matches!(self, BackendError::Transient(_))
    }
}

pub trait Backend: Send + Sync {
    fn id(&self) -> &str;

    fn send(&self, request: &CompletionRequest) -> Result<BackendReply, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend unavailable after {attempts} attempts: {last}")]
    BackendUnavailable { attempts: u32, last: String },
    #[error("credential environment variable {0} is not set")]
    AuthMissing(String),
    #[error("no script entry matches the request: {0}")]
    NoScriptMatch(String),
    #[error("backend failure: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    /// Delay before the first retry; doubles for every further retry.
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 3, base_delay_ms: 500 }
    }
}

impl RetryPolicy {
    pub fn no_delay(max_attempts: u32) -> Self {
        Self { max_attempts, base_delay_ms: 0 }
    }

    /// Delay after the `failed_attempt`-th failure (1-based).
    pub fn delay_after(&self, failed_attempt: u32) -> Duration {
        let factor = 1u64 << failed_attempt.saturating_sub(1).min(16);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor))
    }
}

/// Model name and decoding parameters used to build requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationParams {
    pub model: String,
    pub temperature: f32,
    pub max_new_tokens: u32,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            model: "gpt-4-turbo".into(),
            temperature: DEFAULT_SOLVE_TEMPERATURE,
            max_new_tokens: DEFAULT_MAX_NEW_TOKENS,
        }
    }
}

impl GenerationParams {
    pub fn with_temperature(mut self, temperature: f32) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn request(&self, messages: Vec<ChatMessage>) -> CompletionRequest {
        CompletionRequest {
            model: self.model.clone(),
            messages,
            temperature: self.temperature,
            max_new_tokens: self.max_new_tokens,
            stop: Vec::new(),
        }
    }

    pub fn user_request(&self, prompt: impl Into<String>) -> CompletionRequest {
        self.request(vec![ChatMessage::user(prompt)])
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GatewayStats {
    pub calls: u64,
    pub usage: TokenUsage,
    pub per_call: Vec<TokenUsage>,
}

struct GatewayInner {
    backend: Arc<dyn Backend>,
    retry: RetryPolicy,
    ledger: Mutex<GatewayStats>,
}

/// Shared handle to a backend. Cloning is cheap and clones share the ledger.
#[derive(Clone)]
pub struct Gateway {
    inner: Arc<GatewayInner>,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway").field("backend", &self.inner.backend.id()).field("retry", &self.inner.retry).finish()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self::with_retry(backend, RetryPolicy::default())
    }

    pub fn with_retry(backend: Arc<dyn Backend>, retry: RetryPolicy) -> Self {
        Self { inner: Arc::new(GatewayInner { backend, retry, ledger: Mutex::new(GatewayStats::default()) }) }
    }

    pub fn backend_id(&self) -> &str {
        self.inner.backend.id()
    }

    pub fn retry_policy(&self) -> &RetryPolicy {
        &self.inner.retry
    }

    /// Validates the request, sends it with retries, and records the usage.
    pub fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, GatewayError> {
        request.validate()?;
        let backend = &self.inner.backend;
        let max_attempts = self.inner.retry.max_attempts.max(1);
        let started = Instant::now();
        let mut last_error = String::new();

        for attempt in 1..=max_attempts {
            match backend.send(request) {
                Ok(reply) => {
                    let (usage, usage_estimated) = match reply.usage {
                        Some(usage) => (usage, false),
                        None => (TokenUsage::estimate(request.prompt_chars(), reply.text.chars().count()), true),
                    };
                    self.record(usage);
                    return Ok(CompletionResult {
                        text: reply.text,
                        usage,
                        latency_ms: started.elapsed().as_millis() as u64,
                        backend_id: backend.id().to_string(),
                        usage_estimated,
                    });
                }
                Err(BackendError::Transient(msg)) => {
                    tracing::warn!(backend = backend.id(), attempt, error = %msg, "transient backend failure");
                    last_error = msg;
                    if attempt < max_attempts {
                        let delay = self.inner.retry.delay_after(attempt);
                        if !delay.is_zero() {
                            std::thread::sleep(delay);
                        }
                    }
                }
                Err(BackendError::Fatal(msg)) => return Err(GatewayError::Backend(msg)),
                Err(BackendError::AuthMissing(var)) => return Err(GatewayError::AuthMissing(var)),
                Err(BackendError::NoScriptMatch(msg)) => return Err(GatewayError::NoScriptMatch(msg)),
            }
        }

        Err(GatewayError::BackendUnavailable { attempts: max_attempts, last: last_error })
    }

    fn record(&self, usage: TokenUsage) {
        let mut ledger = self.inner.ledger.lock().expect("usage ledger poisoned");
        ledger.calls += 1;
        ledger.usage += usage;
        ledger.per_call.push(usage);
    }

    /// Snapshot of every successful call made through this gateway (and its clones).
    pub fn stats(&self) -> GatewayStats {
        self.inner.ledger.lock().expect("usage ledger poisoned").clone()
    }
}

/// Free-function form of [`Gateway::complete`].
pub fn complete(request: &CompletionRequest, gateway: &Gateway) -> Result<CompletionResult, GatewayError> {
    gateway.complete(request)
}

/// Componentwise sum of two usages.
pub fn accumulate(a: TokenUsage, b: TokenUsage) -> TokenUsage {
    a + b
}
