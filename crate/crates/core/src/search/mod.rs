//! The search-engine boundary: a deterministic simulated corpus with
//! noise and conflict injection, plus an HTTP web-search client with
//! configurable response field mappings.

mod sim;
mod web;

pub use sim::{inject_adversity, sim_score, tokenize, SimCorpus, SimDoc, SimSearch};
pub use web::{WebSearch, WebSearchConfig};

use crate::error::SearchError;
use serde::{Deserialize, Serialize};

/// Where a retrieved document came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocSource {
    Web,
    Simulated,
}

/// One retrieved search result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub url: String,
    pub title: String,
    pub content: String,
    /// 1-based position within its per-query result list.
    pub rank: usize,
    pub source: DocSource,
}

/// A search engine answering a batch of 1-5 queries with at most `k`
/// ranked documents per query.
pub trait SearchBackend: Send + Sync {
    fn search(&self, queries: &[String], k: usize) -> Result<Vec<Vec<Document>>, SearchError>;
}

/// Search backend that finds nothing; used when episodes must run with
/// retrieval disabled.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoopSearch;

impl SearchBackend for NoopSearch {
    fn search(&self, queries: &[String], _k: usize) -> Result<Vec<Vec<Document>>, SearchError> {
        Ok(vec![Vec::new(); queries.len()])
    }
}

/// Truncates document content to a character budget, respecting char
/// boundaries.
pub(crate) fn cap_content(content: &str, budget: usize) -> String {
    if content.chars().count() <= budget {
        content.to_string()
    } else {
        content.chars().take(budget).collect()
    }
}
