//! HTTP web-search client. Response shapes differ between providers,
//! so every field the client reads is a configurable dot-path.

use super::{cap_content, DocSource, Document, SearchBackend};
use crate::error::SearchError;
use crate::net::{backoff_delays, json_path};
use serde_json::{json, Value};
use std::time::Duration;

/// Provider endpoint plus the field mapping for its JSON responses.
#[derive(Debug, Clone)]
pub struct WebSearchConfig {
    pub endpoint: String,
    /// Name of the environment variable holding the API key; sent as a
    /// bearer token when set. Keys never live in config files.
    pub api_key_env: Option<String>,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff_base: Duration,
    pub query_field: String,
    pub count_field: String,
    pub results_path: String,
    pub title_path: String,
    pub url_path: String,
    pub content_path: String,
    pub content_char_budget: usize,
}

impl Default for WebSearchConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            api_key_env: None,
            timeout: Duration::from_secs(20),
            max_retries: 2,
            backoff_base: Duration::from_millis(250),
            query_field: "query".into(),
            count_field: "count".into(),
            results_path: "results".into(),
            title_path: "title".into(),
            url_path: "url".into(),
            content_path: "snippet".into(),
            content_char_budget: 2000,
        }
    }
}

pub struct WebSearch {
    config: WebSearchConfig,
    agent: ureq::Agent,
}

impl WebSearch {
    pub fn new(config: WebSearchConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { config, agent }
    }

    fn one_query(&self, query: &str, k: usize) -> Result<Vec<Document>, SearchError> {
        let body = json!({
            &self.config.query_field: query,
            &self.config.count_field: k,
        });
        let mut request = self.agent.post(&self.config.endpoint);
        if let Some(env_name) = &self.config.api_key_env {
            if let Ok(key) = std::env::var(env_name) {
                request = request.header("Authorization", &format!("Bearer {key}"));
            }
        }
        let mut response = request
            .send_json(&body)
            .map_err(classify_transport)?;
        let status = response.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(SearchError::HttpStatus(status));
        }
        if !(200..300).contains(&status) {
            return Err(SearchError::HttpStatus(status));
        }
        let value: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| SearchError::Decode(e.to_string()))?;
        let results = json_path(&value, &self.config.results_path)
            .and_then(Value::as_array)
            .ok_or_else(|| {
                SearchError::Decode(format!(
                    "no array at results path `{}`",
                    self.config.results_path
                ))
            })?;
        let mut docs = Vec::new();
        for item in results.iter().take(k) {
            let title = json_path(item, &self.config.title_path)
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            let url = json_path(item, &self.config.url_path)
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            let content = json_path(item, &self.config.content_path)
                .and_then(Value::as_str)
                .unwrap_or_default();
            let content = if content.is_empty() {
                title.clone()
            } else {
                cap_content(content, self.config.content_char_budget)
            };
            if content.is_empty() {
                continue;
            }
            docs.push(Document {
                url,
                title,
                content,
                rank: docs.len() + 1,
                source: DocSource::Web,
            });
        }
        Ok(docs)
    }
}

fn classify_transport(e: ureq::Error) -> SearchError {
    match e {
        ureq::Error::StatusCode(code) => SearchError::HttpStatus(code),
        ureq::Error::Timeout(_) => SearchError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => SearchError::Timeout,
        other => SearchError::Transport(other.to_string()),
    }
}

fn retryable(e: &SearchError) -> bool {
    matches!(e, SearchError::Timeout)
        || matches!(e, SearchError::HttpStatus(code) if *code == 429 || *code >= 500)
}

impl SearchBackend for WebSearch {
    fn search(&self, queries: &[String], k: usize) -> Result<Vec<Vec<Document>>, SearchError> {
        let mut out = Vec::with_capacity(queries.len());
        for query in queries {
            let delays = backoff_delays(self.config.max_retries, self.config.backoff_base);
            let mut attempt = 0;
            let docs = loop {
                match self.one_query(query, k) {
                    Ok(docs) => break docs,
                    Err(e) if retryable(&e) && attempt < delays.len() => {
                        std::thread::sleep(delays[attempt]);
                        attempt += 1;
                    }
                    Err(e) => return Err(e),
                }
            };
            out.push(docs);
        }
        Ok(out)
    }
}
