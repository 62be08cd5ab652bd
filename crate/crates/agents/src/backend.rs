//! Chat-completion client with a fixed timeout, bounded retries and exponential backoff.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{AgentError, Result};
use crate::prompt::ChatMessage;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    /// Base URL; requests go to `{endpoint}/chat/completions`.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_s: f64,
    pub retries: u32,
    /// Environment variable holding the bearer token; unset means no auth header.
    pub api_key_env: String,
    pub backoff_base_s: f64,
    pub backoff_factor: f64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: String::new(),
            model: String::new(),
            temperature: 0.2,
            max_tokens: 1400,
            timeout_s: 90.0,
            retries: 2,
            api_key_env: "EIG_API_KEY".into(),
            backoff_base_s: 1.0,
            backoff_factor: 2.0,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AgentError::Config(m.into()));
        if self.endpoint.trim().is_empty() {
            return bad("endpoint is empty");
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return bad("timeout_s must be positive");
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return bad("temperature must lie in [0, 2]");
        }
        if self.backoff_base_s < 0.0 || self.backoff_factor < 1.0 {
            return bad("backoff must be non-negative and non-shrinking");
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }

    /// Pause before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        Duration::from_secs_f64(self.backoff_base_s * self.backoff_factor.powi(retry as i32 - 1))
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{path}", self.endpoint.trim_end_matches('/'))
    }
}

pub trait Sleeper: Send + Sync {
    fn sleep(&self, d: Duration);
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ThreadSleeper;

impl Sleeper for ThreadSleeper {
    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Anything that turns chat messages into reply text.
pub trait TextBackend: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String>;
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub text: String,
    pub attempts: usize,
}

pub struct ChatClient {
    config: BackendConfig,
    http: reqwest::blocking::Client,
    sleeper: Box<dyn Sleeper>,
}

impl std::fmt::Debug for ChatClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChatClient").field("config", &self.config).finish()
    }
}

impl ChatClient {
    pub fn new(config: BackendConfig) -> Result<Self> {
        Self::with_sleeper(config, Box::new(ThreadSleeper))
    }

    pub fn with_sleeper(config: BackendConfig, sleeper: Box<dyn Sleeper>) -> Result<Self> {
        config.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout())
            .build()
            .map_err(|e| AgentError::Config(e.to_string()))?;
        Ok(ChatClient { config, http, sleeper })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    /// Exact bytes sent for a chat request.
    pub fn request_body(&self, messages: &[ChatMessage]) -> Vec<u8> {
        serde_json::to_vec(&ChatRequest {
            model: &self.config.model,
            messages,
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        })
        .expect("chat request serializes")
    }

    /// POSTs `body` to `path`, retrying transport failures and non-success statuses.
    /// A success response whose body `extract` rejects fails immediately.
    pub fn post<T>(&self, path: &str, body: Vec<u8>, extract: impl Fn(&Value) -> Option<T>) -> Result<(T, usize)> {
        let url = self.config.url(path);
        let token = std::env::var(&self.config.api_key_env).ok().filter(|t| !t.is_empty());
        let total = self.config.retries as usize + 1;
        let mut last = String::new();
        for attempt in 1..=total {
            if attempt > 1 {
                self.sleeper.sleep(self.config.backoff(attempt as u32 - 1));
            }
            let mut req = self
                .http
                .post(&url)
                .header(reqwest::header::CONTENT_TYPE, "application/json")
                .body(body.clone());
            if let Some(t) = &token {
                req = req.bearer_auth(t);
            }
            let resp = match req.send() {
                Ok(r) => r,
                Err(e) => {
                    last = format!("transport: {e}");
                    tracing::warn!(attempt, error = %last, "backend call failed");
                    continue;
                }
            };
            let status = resp.status();
            if !status.is_success() {
                last = format!("status {}", status.as_u16());
                tracing::warn!(attempt, error = %last, "backend call failed");
                continue;
            }
            let text = match resp.text() {
                Ok(t) => t,
                Err(e) => {
                    last = format!("transport: {e}");
                    continue;
                }
            };
            let value: Value = serde_json::from_str(&text).map_err(|e| AgentError::Reply(e.to_string()))?;
            return extract(&value)
                .map(|v| (v, attempt))
                .ok_or_else(|| AgentError::Reply(format!("unexpected response shape: {}", truncate(&text, 200))));
        }
        Err(AgentError::Exhausted { attempts: total, last })
    }

    pub fn chat(&self, messages: &[ChatMessage]) -> Result<Completion> {
        let (text, attempts) = self.post("chat/completions", self.request_body(messages), |v| {
            v.pointer("/choices/0/message/content")?.as_str().map(String::from)
        })?;
        Ok(Completion { text, attempts })
    }
}

impl TextBackend for ChatClient {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        self.chat(messages).map(|c| c.text)
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}
