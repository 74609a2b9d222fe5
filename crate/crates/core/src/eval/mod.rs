//! Evaluation protocols: strict-grader accuracy with search-intensity
//! accounting, per-subset breakdowns, isolation testing, and behavior
//! statistics.

mod behavior;
mod isolation;
pub mod report;

pub use behavior::{behavior_stats, BehaviorCounts};
pub use isolation::{isolation_filter, IsolationStats};

use crate::agent::{run_episode_opts, AgentConfig, EpisodeOptions, Trajectory};
use crate::backends::{ChatBackend, JudgeBackend};
use crate::dataset::{Difficulty, QARecord};
use crate::reward::{grade, verdict_reward, GraderMode};
use crate::search::SearchBackend;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Accuracy and search-intensity aggregate for one subset of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetStats {
    pub accuracy: f64,
    pub avg_search_rounds: f64,
    pub n: usize,
}

/// Whole-suite evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub avg_search_rounds: f64,
    pub avg_search_queries: f64,
    pub per_subset: BTreeMap<String, SubsetStats>,
    pub n: usize,
    pub runs: usize,
}

/// One record-attempt outcome, for the per-record CSV artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordOutcome {
    pub id: String,
    pub run: usize,
    pub correct: bool,
    pub search_rounds: usize,
    pub search_queries: usize,
    pub terminated_by: String,
}

/// Report plus per-attempt detail.
#[derive(Debug, Clone)]
pub struct EvalRun {
    pub report: EvalReport,
    pub outcomes: Vec<RecordOutcome>,
    pub warnings: Vec<String>,
}

fn difficulty_subset(difficulty: Difficulty) -> &'static str {
    match difficulty {
        Difficulty::Easy | Difficulty::Medium => "difficulty:easy_medium",
        Difficulty::Hard | Difficulty::Outlier => "difficulty:hard_outliers",
    }
}

/// Runs every record `runs` times, grades answers with the strict
/// grader, and aggregates accuracy plus search-intensity metrics.
/// Backend failures mark the attempt incorrect and surface as
/// warnings. Results are deterministic for deterministic backends.
pub fn evaluate(
    records: &[QARecord],
    model: &dyn ChatBackend,
    search: &dyn SearchBackend,
    agent_config: &AgentConfig,
    judge: &dyn JudgeBackend,
    runs: usize,
) -> EvalRun {
    let attempts: Vec<(usize, &QARecord)> = (1..=runs)
        .flat_map(|run| records.iter().map(move |r| (run, r)))
        .collect();

    let results: Vec<(RecordOutcome, Trajectory, Vec<String>)> = attempts
        .par_iter()
        .map(|(run, record)| {
            let trajectory = run_episode_opts(
                record,
                model,
                search,
                agent_config,
                EpisodeOptions {
                    attempt: *run,
                    search_enabled: true,
                },
            );
            let mut warnings: Vec<String> = trajectory
                .warnings
                .iter()
                .map(|w| format!("{} run {run}: {w}", record.id))
                .collect();
            let correct = match &trajectory.final_answer {
                Some(answer) => match grade(record, answer, GraderMode::Strict, judge) {
                    Ok(verdict) => verdict_reward(&verdict) == 1.0,
                    Err(e) => {
                        warnings.push(format!(
                            "{} run {run}: judge error, counting incorrect: {e}",
                            record.id
                        ));
                        false
                    }
                },
                None => false,
            };
            let outcome = RecordOutcome {
                id: record.id.to_string(),
                run: *run,
                correct,
                search_rounds: trajectory.search_rounds(),
                search_queries: trajectory.total_queries(),
                terminated_by: serde_json::to_value(trajectory.terminated_by)
                    .expect("enum serializes")
                    .as_str()
                    .unwrap()
                    .to_string(),
            };
            (outcome, trajectory, warnings)
        })
        .collect();

    let n_attempts = results.len().max(1);
    let accuracy =
        results.iter().filter(|(o, _, _)| o.correct).count() as f64 / n_attempts as f64;
    let avg_search_rounds =
        results.iter().map(|(o, _, _)| o.search_rounds as f64).sum::<f64>() / n_attempts as f64;
    let avg_search_queries =
        results.iter().map(|(o, _, _)| o.search_queries as f64).sum::<f64>() / n_attempts as f64;

    let mut per_subset: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for ((outcome, _, _), (_, record)) in results.iter().zip(&attempts) {
        let mut keys = vec![format!("category:{}", record.category.as_str())];
        if let Some(difficulty) = record.difficulty {
            keys.push(difficulty_subset(difficulty).to_string());
        }
        for key in keys {
            let entry = per_subset.entry(key).or_insert((0, 0, 0));
            entry.0 += outcome.correct as usize;
            entry.1 += outcome.search_rounds;
            entry.2 += 1;
        }
    }
    let per_subset = per_subset
        .into_iter()
        .map(|(key, (correct, rounds, count))| {
            (
                key,
                SubsetStats {
                    accuracy: correct as f64 / count as f64,
                    avg_search_rounds: rounds as f64 / count as f64,
                    n: count,
                },
            )
        })
        .collect();

    let mut outcomes = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for (outcome, _, w) in results {
        outcomes.push(outcome);
        warnings.extend(w);
    }
    outcomes.sort_by(|a, b| a.id.cmp(&b.id).then(a.run.cmp(&b.run)));

    EvalRun {
        report: EvalReport {
            accuracy,
            avg_search_rounds,
            avg_search_queries,
            per_subset,
            n: records.len(),
            runs,
        },
        outcomes,
        warnings,
    }
}

/// Collects trajectories for a batch of records (`n` rollouts each);
/// the rollout command's workhorse.
pub fn collect_rollouts(
    records: &[QARecord],
    model: &dyn ChatBackend,
    search: &dyn SearchBackend,
    agent_config: &AgentConfig,
    n: usize,
) -> Vec<Trajectory> {
    let attempts: Vec<(usize, &QARecord)> = records
        .iter()
        .flat_map(|r| (1..=n).map(move |attempt| (attempt, r)))
        .collect();
    attempts
        .par_iter()
        .map(|(attempt, record)| {
            run_episode_opts(
                record,
                model,
                search,
                agent_config,
                EpisodeOptions {
                    attempt: *attempt,
                    search_enabled: true,
                },
            )
        })
        .collect()
}
