//! Run configuration: one TOML document wiring backends, agent, and
//! training knobs together. Secrets never live here; backends take
//! the names of environment variables instead.

use crate::agent::AgentConfig;
use crate::backends::{
    ChatBackend, ChatJudge, HttpChatBackend, HttpChatConfig, JudgeBackend, ScriptedBackend,
    ScriptedJudge,
};
use crate::error::ConfigError;
use crate::grpo::{GRPOConfig, ToySeekEnv};
use crate::reward::{OracleJudge, ScheduleConfig};
use crate::search::{NoopSearch, SearchBackend, SimCorpus, SimSearch, WebSearch, WebSearchConfig};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBackendConfig {
    pub kind: String,
    #[serde(default)]
    pub script_path: Option<PathBuf>,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model_name: Option<String>,
    #[serde(default)]
    pub temperature: Option<f64>,
    #[serde(default)]
    pub timeout_secs: Option<u64>,
    #[serde(default)]
    pub max_retries: Option<u32>,
    #[serde(default)]
    pub backoff_ms: Option<u64>,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub content_path: Option<String>,
    #[serde(default)]
    pub max_concurrency: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBackendConfig {
    pub kind: String,
    #[serde(default)]
    pub corpus_path: Option<PathBuf>,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default)]
    pub timeout_secs: Option<u64>,
    #[serde(default)]
    pub max_retries: Option<u32>,
    #[serde(default)]
    pub backoff_ms: Option<u64>,
    #[serde(default)]
    pub query_field: Option<String>,
    #[serde(default)]
    pub count_field: Option<String>,
    #[serde(default)]
    pub results_path: Option<String>,
    #[serde(default)]
    pub title_path: Option<String>,
    #[serde(default)]
    pub url_path: Option<String>,
    #[serde(default)]
    pub content_path: Option<String>,
    #[serde(default)]
    pub content_char_budget: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyEnvConfig {
    pub num_tasks: usize,
    pub num_answers: usize,
    pub frac_needs_search: f64,
    pub max_rounds: usize,
    pub train_steps: u64,
}

impl Default for ToyEnvConfig {
    fn default() -> Self {
        Self {
            num_tasks: 24,
            num_answers: 4,
            frac_needs_search: 0.8,
            max_rounds: 4,
            train_steps: 150,
        }
    }
}

fn default_workers() -> usize {
    4
}

/// The full run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub grpo: GRPOConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    pub model_backend: ModelBackendConfig,
    pub judge_backend: ModelBackendConfig,
    pub search_backend: SearchBackendConfig,
    #[serde(default)]
    pub toy_env: ToyEnvConfig,
}

/// Scripted judge file: keyed responses plus a FIFO fallback queue.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct ScriptedJudgeFile {
    #[serde(default)]
    keyed: Vec<KeyedVerdict>,
    #[serde(default)]
    queue: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KeyedVerdict {
    id: String,
    tag: String,
    text: String,
}

impl RunConfig {
    /// Loads and validates a config file. Relative paths inside the
    /// file resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&path);
                }
            }
        };
        resolve(&mut self.model_backend.script_path);
        resolve(&mut self.judge_backend.script_path);
        resolve(&mut self.search_backend.corpus_path);
        resolve(&mut self.output_dir);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.agent
            .validate()
            .map_err(|m| ConfigError::new(format!("agent.{m}"), "invalid value"))?;
        self.grpo
            .validate()
            .map_err(|m| ConfigError::new(format!("grpo.{m}"), "invalid value"))?;
        if self.workers == 0 {
            return Err(ConfigError::new("workers", "must be >= 1"));
        }

        match self.model_backend.kind.as_str() {
            "scripted" => {
                let path = self.model_backend.script_path.as_ref().ok_or_else(|| {
                    ConfigError::new("model_backend.script_path", "required for kind=scripted")
                })?;
                if !path.exists() {
                    return Err(ConfigError::new(
                        "model_backend.script_path",
                        format!("{} does not exist", path.display()),
                    ));
                }
            }
            "http" => {
                if self.model_backend.endpoint.is_none() {
                    return Err(ConfigError::new(
                        "model_backend.endpoint",
                        "required for kind=http",
                    ));
                }
            }
            other => {
                return Err(ConfigError::new(
                    "model_backend.kind",
                    format!("unknown kind `{other}` (expected scripted|http)"),
                ));
            }
        }

        match self.judge_backend.kind.as_str() {
            "oracle" | "oracle_relaxed" => {}
            "scripted" => {
                let path = self.judge_backend.script_path.as_ref().ok_or_else(|| {
                    ConfigError::new("judge_backend.script_path", "required for kind=scripted")
                })?;
                if !path.exists() {
                    return Err(ConfigError::new(
                        "judge_backend.script_path",
                        format!("{} does not exist", path.display()),
                    ));
                }
            }
            "http" => {
                if self.judge_backend.endpoint.is_none() {
                    return Err(ConfigError::new(
                        "judge_backend.endpoint",
                        "required for kind=http",
                    ));
                }
            }
            other => {
                return Err(ConfigError::new(
                    "judge_backend.kind",
                    format!("unknown kind `{other}` (expected oracle|oracle_relaxed|scripted|http)"),
                ));
            }
        }

        match self.search_backend.kind.as_str() {
            "none" => {}
            "sim" => {
                let path = self.search_backend.corpus_path.as_ref().ok_or_else(|| {
                    ConfigError::new("search_backend.corpus_path", "required for kind=sim")
                })?;
                if !path.exists() {
                    return Err(ConfigError::new(
                        "search_backend.corpus_path",
                        format!("{} does not exist", path.display()),
                    ));
                }
            }
            "web" => {
                if self.search_backend.endpoint.is_none() {
                    return Err(ConfigError::new(
                        "search_backend.endpoint",
                        "required for kind=web",
                    ));
                }
            }
            other => {
                return Err(ConfigError::new(
                    "search_backend.kind",
                    format!("unknown kind `{other}` (expected sim|web|none)"),
                ));
            }
        }
        Ok(())
    }

    fn http_chat_config(spec: &ModelBackendConfig, default_temperature: f64) -> HttpChatConfig {
        let defaults = HttpChatConfig::default();
        HttpChatConfig {
            endpoint: spec.endpoint.clone().unwrap_or_default(),
            model_name: spec.model_name.clone().unwrap_or_default(),
            temperature: spec.temperature.unwrap_or(default_temperature),
            timeout: spec
                .timeout_secs
                .map(Duration::from_secs)
                .unwrap_or(defaults.timeout),
            max_retries: spec.max_retries.unwrap_or(defaults.max_retries),
            backoff_base: spec
                .backoff_ms
                .map(Duration::from_millis)
                .unwrap_or(defaults.backoff_base),
            api_key_env: spec.api_key_env.clone(),
            content_path: spec
                .content_path
                .clone()
                .unwrap_or(defaults.content_path),
            max_concurrency: spec.max_concurrency.unwrap_or(defaults.max_concurrency),
        }
    }

    pub fn build_model(&self) -> Result<Box<dyn ChatBackend>, ConfigError> {
        match self.model_backend.kind.as_str() {
            "scripted" => {
                let path = self.model_backend.script_path.as_ref().unwrap();
                let backend = ScriptedBackend::load(path).map_err(|e| {
                    ConfigError::new("model_backend.script_path", e.to_string())
                })?;
                Ok(Box::new(backend))
            }
            "http" => Ok(Box::new(HttpChatBackend::new(Self::http_chat_config(
                &self.model_backend,
                self.agent.sampling_temperature,
            )))),
            _ => unreachable!("validated"),
        }
    }

    pub fn build_judge(&self) -> Result<Box<dyn JudgeBackend>, ConfigError> {
        match self.judge_backend.kind.as_str() {
            "oracle" => Ok(Box::new(OracleJudge::exact())),
            "oracle_relaxed" => Ok(Box::new(OracleJudge::relaxed())),
            "scripted" => {
                let path = self.judge_backend.script_path.as_ref().unwrap();
                let text = std::fs::read_to_string(path).map_err(|e| {
                    ConfigError::new("judge_backend.script_path", e.to_string())
                })?;
                let file: ScriptedJudgeFile = serde_json::from_str(&text).map_err(|e| {
                    ConfigError::new("judge_backend.script_path", e.to_string())
                })?;
                let keyed: HashMap<(String, String), String> = file
                    .keyed
                    .into_iter()
                    .map(|k| ((k.id, k.tag), k.text))
                    .collect();
                let judge = if keyed.is_empty() {
                    ScriptedJudge::from_queue(file.queue)
                } else {
                    ScriptedJudge::keyed(keyed)
                };
                Ok(Box::new(judge))
            }
            // Judge defaults to greedy decoding for reproducibility.
            "http" => Ok(Box::new(ChatJudge::new(HttpChatBackend::new(
                Self::http_chat_config(&self.judge_backend, 0.0),
            )))),
            _ => unreachable!("validated"),
        }
    }

    pub fn build_search(&self) -> Result<Box<dyn SearchBackend>, ConfigError> {
        match self.search_backend.kind.as_str() {
            "none" => Ok(Box::new(NoopSearch)),
            "sim" => {
                let path = self.search_backend.corpus_path.as_ref().unwrap();
                let corpus = SimCorpus::load(path).map_err(|e| {
                    ConfigError::new("search_backend.corpus_path", e.to_string())
                })?;
                Ok(Box::new(SimSearch::new(corpus)))
            }
            "web" => {
                let defaults = WebSearchConfig::default();
                let spec = &self.search_backend;
                Ok(Box::new(WebSearch::new(WebSearchConfig {
                    endpoint: spec.endpoint.clone().unwrap_or_default(),
                    api_key_env: spec.api_key_env.clone(),
                    timeout: spec
                        .timeout_secs
                        .map(Duration::from_secs)
                        .unwrap_or(defaults.timeout),
                    max_retries: spec.max_retries.unwrap_or(defaults.max_retries),
                    backoff_base: spec
                        .backoff_ms
                        .map(Duration::from_millis)
                        .unwrap_or(defaults.backoff_base),
                    query_field: spec.query_field.clone().unwrap_or(defaults.query_field),
                    count_field: spec.count_field.clone().unwrap_or(defaults.count_field),
                    results_path: spec.results_path.clone().unwrap_or(defaults.results_path),
                    title_path: spec.title_path.clone().unwrap_or(defaults.title_path),
                    url_path: spec.url_path.clone().unwrap_or(defaults.url_path),
                    content_path: spec.content_path.clone().unwrap_or(defaults.content_path),
                    content_char_budget: spec
                        .content_char_budget
                        .unwrap_or(defaults.content_char_budget),
                })))
            }
            _ => unreachable!("validated"),
        }
    }

    pub fn build_toy_env(&self) -> ToySeekEnv {
        ToySeekEnv::generate(
            self.toy_env.num_tasks,
            self.toy_env.frac_needs_search,
            self.toy_env.num_answers,
            self.toy_env.max_rounds,
            self.seed,
        )
    }
}
