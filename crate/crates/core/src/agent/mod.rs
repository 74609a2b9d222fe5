//! The iterative reasoning-retrieval loop: turn parsing, prompt
//! rendering, episode execution, and token-provenance tracking for
//! downstream loss masking.
//!
//! An episode alternates model turns with retrieval. Each model turn
//! carries a reasoning block followed by either a search tool call or a
//! final answer; search results are rendered into the next user turn
//! and the loop continues until the model answers or the round cap is
//! hit.

mod episode;
mod parser;
mod prompt;
mod provenance;

pub use episode::{run_episode, run_episode_opts, EpisodeOptions};
pub use parser::{parse_turn, serialize_action, ParsedTurn};
pub use prompt::{
    render_agent_prompt, render_agent_prompt_no_search, render_documents_turn, render_next_prompt,
    render_template, AGENT_PROMPT_TEMPLATE, FORCED_ANSWER_RETRY,
};
pub use provenance::{provenance_mask, CharClassTokenizer, Tokenization};

use crate::dataset::QuestionId;
use crate::search::Document;
use serde::{Deserialize, Serialize};

/// What the model chose to do with a turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    Search { queries: Vec<String> },
    Answer { text: String },
}

/// One completed round: the model's reasoning, its action, and any
/// documents retrieved for a search action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    /// 1-based round number.
    pub index: usize,
    pub reasoning: String,
    pub action: Action,
    #[serde(default)]
    pub documents: Vec<Document>,
}

/// The question plus the ordered rounds completed so far.
#[derive(Debug, Clone, Default)]
pub struct History {
    pub question: String,
    pub rounds: Vec<Round>,
}

impl History {
    pub fn new(question: impl Into<String>) -> Self {
        Self {
            question: question.into(),
            rounds: Vec::new(),
        }
    }
}

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    Answered,
    RoundCapExceeded,
    BackendError,
    ParseFailure,
}

/// Provenance of a transcript span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Prompt,
    ModelGenerated,
    Retrieved,
}

/// A contiguous transcript segment with uniform provenance.
/// Concatenating a trajectory's spans reproduces its transcript
/// exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSpan {
    pub text: String,
    pub provenance: Provenance,
}

impl TokenSpan {
    pub fn new(text: impl Into<String>, provenance: Provenance) -> Self {
        Self {
            text: text.into(),
            provenance,
        }
    }
}

/// One rollout of the agent loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub record_id: QuestionId,
    pub rounds: Vec<Round>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_answer: Option<String>,
    pub terminated_by: TerminatedBy,
    pub token_spans: Vec<TokenSpan>,
    pub used_search: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Trajectory {
    /// Number of search rounds taken.
    pub fn search_rounds(&self) -> usize {
        self.rounds
            .iter()
            .filter(|r| matches!(r.action, Action::Search { .. }))
            .count()
    }

    /// Total search queries issued across all rounds.
    pub fn total_queries(&self) -> usize {
        self.rounds
            .iter()
            .map(|r| match &r.action {
                Action::Search { queries } => queries.len(),
                Action::Answer { .. } => 0,
            })
            .sum()
    }

    /// The full episode transcript (concatenation of all spans).
    pub fn transcript(&self) -> String {
        self.token_spans.iter().map(|s| s.text.as_str()).collect()
    }
}

/// Knobs for the episode loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentConfig {
    pub max_rounds: usize,
    pub max_queries_per_round: usize,
    pub top_k_per_query: usize,
    pub sampling_temperature: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            max_rounds: 7,
            max_queries_per_round: 5,
            top_k_per_query: 2,
            sampling_temperature: 0.9,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_rounds < 1 {
            return Err("max_rounds: must be >= 1".into());
        }
        if !(1..=5).contains(&self.max_queries_per_round) {
            return Err("max_queries_per_round: must be in 1..=5".into());
        }
        if self.top_k_per_query < 1 {
            return Err("top_k_per_query: must be >= 1".into());
        }
        if self.sampling_temperature < 0.0 {
            return Err("sampling_temperature: must be >= 0".into());
        }
        Ok(())
    }
}
