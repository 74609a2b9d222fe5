//! Isolation testing: strip retrieval away, find the problems neither
//! model can solve from internal knowledge alone, and keep only those
//! for the search-enabled comparison.

use crate::agent::{run_episode_opts, AgentConfig, EpisodeOptions};
use crate::backends::{ChatBackend, JudgeBackend};
use crate::dataset::QARecord;
use crate::reward::{grade, verdict_reward, GraderMode};
use crate::search::NoopSearch;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Per-record pass@k outcomes for both models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsolationStats {
    pub id: String,
    pub model_a_pass: bool,
    pub model_b_pass: bool,
    pub dropped: bool,
}

/// Runs each model `k` times per record with search disabled (no-op
/// search backend plus the no-search prompt variant; tool calls get
/// one forced-answer retry, then fail the attempt). A record is
/// dropped exactly when BOTH models reach pass@k on it; the survivors
/// are returned in input order together with the per-record stats.
pub fn isolation_filter(
    records: &[QARecord],
    model_a: &dyn ChatBackend,
    model_b: &dyn ChatBackend,
    agent_config: &AgentConfig,
    k: usize,
    judge: &dyn JudgeBackend,
) -> (Vec<QARecord>, Vec<IsolationStats>) {
    let pass_at_k = |model: &dyn ChatBackend, record: &QARecord| -> bool {
        (1..=k).any(|attempt| {
            let trajectory = run_episode_opts(
                record,
                model,
                &NoopSearch,
                agent_config,
                EpisodeOptions {
                    attempt,
                    search_enabled: false,
                },
            );
            match &trajectory.final_answer {
                Some(answer) => grade(record, answer, GraderMode::Strict, judge)
                    .map(|v| verdict_reward(&v) == 1.0)
                    .unwrap_or(false),
                None => false,
            }
        })
    };

    let stats: Vec<IsolationStats> = records
        .par_iter()
        .map(|record| {
            let a = pass_at_k(model_a, record);
            let b = pass_at_k(model_b, record);
            IsolationStats {
                id: record.id.to_string(),
                model_a_pass: a,
                model_b_pass: b,
                dropped: a && b,
            }
        })
        .collect();

    let dropped: BTreeSet<&str> = stats
        .iter()
        .filter(|s| s.dropped)
        .map(|s| s.id.as_str())
        .collect();
    let survivors = records
        .iter()
        .filter(|r| !dropped.contains(r.id.as_str()))
        .cloned()
        .collect();
    (survivors, stats)
}
