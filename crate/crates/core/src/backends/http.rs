//! Chat-completion HTTP client with retries and a per-backend
//! concurrency cap.

use super::{ChatBackend, ChatMessage, TurnCtx};
use crate::error::BackendError;
use crate::net::{backoff_delays, json_path};
use serde_json::{json, Value};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

/// Endpoint settings for a chat-completion-style API. The response
/// content location is a configurable dot-path to accommodate
/// providers with different envelopes.
#[derive(Debug, Clone)]
pub struct HttpChatConfig {
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff_base: Duration,
    /// Environment variable holding the API key; sent as a bearer
    /// token when set.
    pub api_key_env: Option<String>,
    pub content_path: String,
    pub max_concurrency: usize,
}

impl Default for HttpChatConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            model_name: String::new(),
            temperature: 0.9,
            timeout: Duration::from_secs(60),
            max_retries: 2,
            backoff_base: Duration::from_millis(250),
            api_key_env: None,
            content_path: "choices.0.message.content".into(),
            max_concurrency: 8,
        }
    }
}

/// Counting semaphore; std has none and this needs no fairness.
struct Gate {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Gate {
    fn new(permits: usize) -> Self {
        Self {
            permits: Mutex::new(permits.max(1)),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.gate.permits.lock().unwrap() += 1;
        self.gate.available.notify_one();
    }
}

pub struct HttpChatBackend {
    config: HttpChatConfig,
    agent: ureq::Agent,
    gate: Gate,
}

impl HttpChatBackend {
    pub fn new(config: HttpChatConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let gate = Gate::new(config.max_concurrency);
        Self {
            config,
            agent,
            gate,
        }
    }

    fn request_once(&self, messages: &[ChatMessage]) -> Result<String, BackendError> {
        let body = json!({
            "model": self.config.model_name,
            "messages": messages
                .iter()
                .map(|m| json!({"role": m.role.as_str(), "content": m.content}))
                .collect::<Vec<_>>(),
            "temperature": self.config.temperature,
        });
        let mut request = self.agent.post(&self.config.endpoint);
        if let Some(env_name) = &self.config.api_key_env {
            if let Ok(key) = std::env::var(env_name) {
                request = request.header("Authorization", &format!("Bearer {key}"));
            }
        }
        let mut response = request.send_json(&body).map_err(classify_transport)?;
        let status = response.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(BackendError::HttpStatus(status));
        }
        let value: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Decode(e.to_string()))?;
        json_path(&value, &self.config.content_path)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| {
                BackendError::Decode(format!(
                    "no string at content path `{}`",
                    self.config.content_path
                ))
            })
    }
}

fn classify_transport(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::StatusCode(code) => BackendError::HttpStatus(code),
        ureq::Error::Timeout(_) => BackendError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => BackendError::Timeout,
        other => BackendError::Transport(other.to_string()),
    }
}

// Requests are idempotent reads, so retrying timeouts and 5xx/429 never
// duplicates side effects.
fn retryable(e: &BackendError) -> bool {
    matches!(e, BackendError::Timeout)
        || matches!(e, BackendError::HttpStatus(code) if *code == 429 || *code >= 500)
}

impl ChatBackend for HttpChatBackend {
    fn complete(&self, _ctx: &TurnCtx<'_>, messages: &[ChatMessage]) -> Result<String, BackendError> {
        let _permit = self.gate.acquire();
        let delays = backoff_delays(self.config.max_retries, self.config.backoff_base);
        let mut attempt = 0;
        loop {
            match self.request_once(messages) {
                Ok(text) => return Ok(text),
                Err(e) if retryable(&e) && attempt < delays.len() => {
                    std::thread::sleep(delays[attempt]);
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
