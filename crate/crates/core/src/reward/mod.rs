//! Per-rollout rewards: format gate, grader-based accuracy (loose and
//! strict), the group-level extra search-call bonus, and the
//! loose-to-strict schedule.

mod grader;
mod oracle;
pub(crate) mod templates;

pub use grader::{grade, GradedGroup, GradedRollout};
pub use oracle::{Matching, OracleJudge};
pub use templates::{
    render_behavior_prompt, render_loose_prompt, render_strict_prompt, BEHAVIOR_CONFLICT,
    BEHAVIOR_REFLECTION, BEHAVIOR_VERIFICATION,
};

use crate::agent::{TerminatedBy, Trajectory};
use serde::{Deserialize, Serialize};

/// A parsed judge verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// Single scoring call, 1-10 with a free-text rationale.
    Loose { score: i32, rationale: String },
    /// Three independent boolean judgments.
    Strict { judgments: [bool; 3] },
}

/// Which grader the reward schedule is currently using.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraderMode {
    Loose,
    Strict,
}

/// Optimization step at which grading switches from loose to strict.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub switch_step: u64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        // Loose rewards for the first 80 steps, strict afterwards.
        Self { switch_step: 80 }
    }
}

/// Reward components for one rollout. `total` is always
/// `format x accuracy + extra_search_bonus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub format: u8,
    pub accuracy: f64,
    pub extra_search_bonus: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn compose(format: u8, accuracy: f64, extra_search_bonus: f64) -> Self {
        Self {
            format,
            accuracy,
            extra_search_bonus,
            total: f64::from(format) * accuracy + extra_search_bonus,
        }
    }
}

/// 1.0 when the loose grader's score clears the threshold of 6.
pub fn loose_reward(score: i32) -> f64 {
    if score >= 6 {
        1.0
    } else {
        0.0
    }
}

/// 1.0 when at least two of the three strict judgments are positive.
pub fn strict_reward(judgments: &[bool; 3]) -> f64 {
    let positive = judgments.iter().filter(|j| **j).count();
    if positive >= 2 {
        1.0
    } else {
        0.0
    }
}

/// Accuracy reward for a verdict under its own grading rule.
pub fn verdict_reward(verdict: &Verdict) -> f64 {
    match verdict {
        Verdict::Loose { score, .. } => loose_reward(*score),
        Verdict::Strict { judgments } => strict_reward(judgments),
    }
}

/// Group-level bonus for correct search-enabled rollouts.
///
/// The bonus fires only when every search-free rollout failed and at
/// least one search-enabled rollout succeeded; it then pays 1.0 to
/// exactly the search-enabled successes.
pub fn extra_search_bonus(group: &[(bool, bool)]) -> Vec<f64> {
    let search_free_all_failed = group
        .iter()
        .all(|(used_search, correct)| *used_search || !correct);
    let some_search_success = group
        .iter()
        .any(|(used_search, correct)| *used_search && *correct);
    let eligible = search_free_all_failed && some_search_success;
    group
        .iter()
        .map(|(used_search, correct)| {
            if eligible && *used_search && *correct {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Format gate: the episode must have produced an answer through clean
/// parses. In strict mode, query-limit truncations also fail the gate.
pub fn format_reward(trajectory: &Trajectory, strict: bool) -> u8 {
    if trajectory.terminated_by != TerminatedBy::Answered {
        return 0;
    }
    if strict && !trajectory.warnings.is_empty() {
        return 0;
    }
    1
}

/// Grader in effect at an optimization step: loose before the switch,
/// strict from the switch onwards.
pub fn reward_mode_at(step: u64, schedule: &ScheduleConfig) -> GraderMode {
    if step < schedule.switch_step {
        GraderMode::Loose
    } else {
        GraderMode::Strict
    }
}
