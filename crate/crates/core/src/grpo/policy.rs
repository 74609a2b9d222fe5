//! Tabular softmax policy over finite state/action spaces.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A policy parameterized by one logit per (state, action) pair.
/// Action probabilities are the softmax of a state's logit row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyPolicy {
    n_states: usize,
    n_actions: usize,
    logits: Vec<f64>,
}

impl ToyPolicy {
    /// All-zero logits: uniform over actions in every state.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        assert!(n_states > 0 && n_actions > 0);
        Self {
            n_states,
            n_actions,
            logits: vec![0.0; n_states * n_actions],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn logit(&self, state: usize, action: usize) -> f64 {
        self.logits[state * self.n_actions + action]
    }

    pub fn set_logit(&mut self, state: usize, action: usize, value: f64) {
        self.logits[state * self.n_actions + action] = value;
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    fn row(&self, state: usize) -> &[f64] {
        let start = state * self.n_actions;
        &self.logits[start..start + self.n_actions]
    }

    /// Log-softmax of a state's logit row (max-shifted for stability).
    pub fn log_probs(&self, state: usize) -> Vec<f64> {
        let row = self.row(state);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|z| (z - max).exp()).sum::<f64>().ln() + max;
        row.iter().map(|z| z - log_sum).collect()
    }

    pub fn probs(&self, state: usize) -> Vec<f64> {
        self.log_probs(state).iter().map(|lp| lp.exp()).collect()
    }

    pub fn logprob(&self, state: usize, action: usize) -> f64 {
        self.log_probs(state)[action]
    }

    /// Samples an action by inverse CDF over the softmax row.
    pub fn sample(&self, state: usize, rng: &mut impl Rng) -> usize {
        let probs = self.probs(state);
        let draw: f64 = rng.random();
        let mut cumulative = 0.0;
        for (action, p) in probs.iter().enumerate() {
            cumulative += p;
            if draw < cumulative {
                return action;
            }
        }
        self.n_actions - 1
    }
}

/// Gradient over policy logits, laid out like [`ToyPolicy::logits`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGrad {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl PolicyGrad {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            values: vec![0.0; n_states * n_actions],
        }
    }

    pub fn zeros_like(policy: &ToyPolicy) -> Self {
        Self::zeros(policy.n_states, policy.n_actions)
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    pub fn add(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.n_actions + action] += value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn accumulate(&mut self, other: &PolicyGrad) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }
}
