//! Desk-scale framework for search-and-reason agents: an iterative
//! retrieval loop over pluggable model/search backends, group-relative
//! policy optimization with retrieved-token loss masking, a staged
//! reward system with LLM-or-oracle graders, task difficulty tagging,
//! and evaluation protocols with search-intensity accounting.

pub mod agent;
pub mod backends;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod grpo;
pub mod reward;
pub mod search;
pub mod stats;

mod net;

pub use error::{Error, Result};
