//! Group-relative policy optimization: advantage normalization, the
//! clipped surrogate objective with exact-KL regularization,
//! masked-token gradient exclusion, and a tabular policy plus toy
//! environment that make the math checkable end to end.

mod loss;
mod policy;
mod toy_env;
mod train;

pub use loss::{apply_update, compute_advantages, grpo_loss, GrpoLoss};
pub use policy::{PolicyGrad, ToyPolicy};
pub use toy_env::{simulate_rollout, ToyRollout, ToySeekEnv, ToyTask, ACTION_SEARCH, STATE_START};
pub use train::{train_toy, TrainStepLog, TrainingLog};

use crate::error::GrpoError;
use serde::{Deserialize, Serialize};

/// Optimization hyperparameters. Defaults: 14 rollouts per group,
/// clip 0.2, KL coefficient 0.001, learning rate 1e-6, batch 32.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GRPOConfig {
    pub group_size: usize,
    pub clip_epsilon: f64,
    pub kl_beta: f64,
    pub learning_rate: f64,
    /// Groups whose reward standard deviation falls below this get
    /// all-zero advantages instead of dividing by (near) zero.
    pub std_guard: f64,
    pub batch_size: usize,
}

impl Default for GRPOConfig {
    fn default() -> Self {
        Self {
            group_size: 14,
            clip_epsilon: 0.2,
            kl_beta: 0.001,
            learning_rate: 1e-6,
            std_guard: 1e-6,
            batch_size: 32,
        }
    }
}

impl GRPOConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.group_size < 2 {
            return Err("group_size: must be >= 2".into());
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return Err("clip_epsilon: must be in (0, 1)".into());
        }
        if self.kl_beta < 0.0 {
            return Err("kl_beta: must be >= 0".into());
        }
        if self.std_guard <= 0.0 {
            return Err("std_guard: must be > 0".into());
        }
        if self.batch_size == 0 {
            return Err("batch_size: must be >= 1".into());
        }
        Ok(())
    }
}

/// One (state, action) step of a rollout under the tabular policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStep {
    pub state: usize,
    pub action: usize,
}

/// One rollout's token-level data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rollout {
    pub steps: Vec<TokenStep>,
    /// Log-probabilities of the taken actions under the sampling
    /// policy.
    pub logprobs_old: Vec<f64>,
    /// Log-probabilities of the taken actions under the reference
    /// policy; used for the sampled-KL diagnostic.
    pub logprobs_ref: Vec<f64>,
    /// True for positions the gradient may flow through
    /// (model-generated tokens).
    pub mask: Vec<bool>,
}

impl Rollout {
    fn check_shape(&self, index: usize) -> Result<(), GrpoError> {
        let n = self.steps.len();
        if self.logprobs_old.len() != n || self.logprobs_ref.len() != n || self.mask.len() != n {
            return Err(GrpoError::ShapeMismatch(format!(
                "rollout {index}: steps {n}, old {}, ref {}, mask {}",
                self.logprobs_old.len(),
                self.logprobs_ref.len(),
                self.mask.len()
            )));
        }
        Ok(())
    }
}

/// A group of rollouts for one task, with rewards and (once computed)
/// normalized advantages.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RolloutGroup {
    pub rewards: Vec<f64>,
    pub rollouts: Vec<Rollout>,
    pub advantages: Vec<f64>,
}

impl RolloutGroup {
    pub fn new(rewards: Vec<f64>, rollouts: Vec<Rollout>) -> Self {
        Self {
            rewards,
            rollouts,
            advantages: Vec::new(),
        }
    }

    /// Fills `advantages` from `rewards`.
    pub fn normalize_advantages(&mut self, std_guard: f64) {
        self.advantages = compute_advantages(&self.rewards, std_guard);
    }

    pub(crate) fn check_shapes(&self) -> Result<(), GrpoError> {
        if self.rewards.len() != self.rollouts.len() {
            return Err(GrpoError::ShapeMismatch(format!(
                "rewards {} vs rollouts {}",
                self.rewards.len(),
                self.rollouts.len()
            )));
        }
        if self.advantages.len() != self.rollouts.len() {
            return Err(GrpoError::ShapeMismatch(format!(
                "advantages {} vs rollouts {} (advantages not computed?)",
                self.advantages.len(),
                self.rollouts.len()
            )));
        }
        for (i, rollout) in self.rollouts.iter().enumerate() {
            rollout.check_shape(i)?;
        }
        Ok(())
    }
}
