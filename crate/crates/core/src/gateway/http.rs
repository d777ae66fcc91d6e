use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Backend, BackendError, BackendReply, CompletionRequest, Role, TokenUsage};

pub const DEFAULT_API_KEY_ENV: &str = "HDFLOW_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpBackendConfig {
    /// Base URL of a chat-completions style API, e.g. `https://api.openai.com/v1`.
    pub base_url: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub request_timeout_s: u64,
}

impl Default for HttpBackendConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            request_timeout_s: 120,
        }
    }
}

/// Chat-completions client over HTTP/JSON.
pub struct HttpBackend {
    id: String,
    config: HttpBackendConfig,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend").field("id", &self.id).field("config", &self.config).finish()
    }
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.request_timeout_s.max(1))))
            .build()
            .into();
        Self { id: format!("http:{}", config.base_url), config, agent }
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn body(request: &CompletionRequest) -> Value {
        let messages: Vec<Value> = request
            .messages
            .iter()
            .map(|m| {
                let role = match m.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                json!({ "role": role, "content": m.content })
            })
            .collect();
        let mut body = json!({
            "model": request.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_new_tokens,
        });
        if !request.stop.is_empty() {
            body["stop"] = json!(request.stop);
        }
        body
    }
}

/// Pulls the reply text and (optional) usage out of a chat-completions response body.
pub(crate) fn parse_response(body: &Value) -> Result<BackendReply, BackendError> {
    let text = body
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::Fatal("response has no choices[0].message.content".into()))?
        .to_string();
    let usage = body.get("usage").and_then(|u| {
        let prompt = u.get("prompt_tokens")?.as_u64()?;
        let completion = u.get("completion_tokens")?.as_u64()?;
        Some(TokenUsage::new(prompt, completion))
    });
    Ok(BackendReply { text, usage })
}

fn classify(err: ureq::Error) -> BackendError {
    match err {
        ureq::Error::Timeout(_)
        | ureq::Error::Io(_)
        | ureq::Error::ConnectionFailed
        | ureq::Error::HostNotFound
        | ureq::Error::BodyStalled => BackendError::Transient(err.to_string()),
        other => BackendError::Fatal(other.to_string()),
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn send(&self, request: &CompletionRequest) -> Result<BackendReply, BackendError> {
        let key = std::env::var(&self.config.api_key_env)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| BackendError::AuthMissing(self.config.api_key_env.clone()))?;

        let mut response = self
            .agent
            .post(&self.endpoint())
            .header("Authorization", &format!("Bearer {key}"))
            .send_json(Self::body(request))
            .map_err(classify)?;

        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(classify)?;
        match status {
            200..=299 => {
                let body: Value = serde_json::from_str(&text)
                    .map_err(|e| BackendError::Fatal(format!("invalid JSON response: {e}")))?;
                parse_response(&body)
            }
            408 | 429 | 500..=599 => Err(BackendError::Transient(format!("HTTP {status}: {text}"))),
            _ => Err(BackendError::Fatal(format!("HTTP {status}: {text}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{ChatMessage, GenerationParams};

    #[test]
    fn request_body_shape() {
        let mut req =
            GenerationParams::default().request(vec![ChatMessage::system("be brief"), ChatMessage::user("hi")]);
        req.stop = vec!["###".into()];
        let body = HttpBackend::body(&req);
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "hi");
        assert_eq!(body["max_tokens"], 2048);
        assert_eq!(body["stop"][0], "###");
    }

    #[test]
    fn response_parsing() {
        let body = json!({
            "choices": [{"message": {"role": "assistant", "content": "42"}}],
            "usage": {"prompt_tokens": 10, "completion_tokens": 2, "total_tokens": 12}
        });
        let reply = parse_response(&body).unwrap();
        assert_eq!(reply.text, "42");
        assert_eq!(reply.usage, Some(TokenUsage::new(10, 2)));

        let no_usage = json!({"choices": [{"message": {"content": "x"}}]});
        assert_eq!(parse_response(&no_usage).unwrap().usage, None);
        assert!(parse_response(&json!({})).is_err());
    }

    #[test]
    fn missing_credential() {
        let backend = HttpBackend::new(HttpBackendConfig {
            api_key_env: "HDFLOW_TEST_KEY_THAT_IS_NEVER_SET".into(),
            ..Default::default()
        });
        let err = backend.send(&GenerationParams::default().user_request("hi")).unwrap_err();
        assert_eq!(err, BackendError::AuthMissing("HDFLOW_TEST_KEY_THAT_IS_NEVER_SET".into()));
    }
}
