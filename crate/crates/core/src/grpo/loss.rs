//! Advantage normalization, the clipped surrogate loss with exact
//! categorical KL, and its analytic gradient.
//!
//! Aggregation is token-level mean within a rollout, then rollout-level
//! mean across the group; both the surrogate and the KL term use the
//! same scheme, and both see only unmasked token positions.

use super::{GRPOConfig, PolicyGrad, RolloutGroup, ToyPolicy};
use crate::error::GrpoError;
use crate::stats::{mean, pop_std};
use std::collections::HashMap;

/// Group-relative advantages: (r_i - mean) / std with the population
/// standard deviation. Degenerate groups (std below the guard) get
/// all-zero advantages.
pub fn compute_advantages(rewards: &[f64], std_guard: f64) -> Vec<f64> {
    let m = mean(rewards);
    let s = pop_std(rewards);
    if s < std_guard {
        return vec![0.0; rewards.len()];
    }
    rewards.iter().map(|r| (r - m) / s).collect()
}

/// Loss value, its components, and the gradient over policy logits.
#[derive(Debug, Clone)]
pub struct GrpoLoss {
    pub loss: f64,
    /// Mean clipped surrogate (the maximized quantity; enters the loss
    /// negated).
    pub surrogate: f64,
    /// Mean exact categorical KL(policy || reference) over unmasked
    /// positions.
    pub kl: f64,
    pub grad: PolicyGrad,
}

struct StateCache {
    log_probs: HashMap<usize, Vec<f64>>,
    kl: HashMap<usize, f64>,
}

impl StateCache {
    fn new() -> Self {
        Self {
            log_probs: HashMap::new(),
            kl: HashMap::new(),
        }
    }

    fn log_probs<'a>(&'a mut self, policy: &ToyPolicy, state: usize) -> &'a [f64] {
        self.log_probs
            .entry(state)
            .or_insert_with(|| policy.log_probs(state))
    }

    fn kl(&mut self, policy: &ToyPolicy, reference: &ToyPolicy, state: usize) -> f64 {
        if let Some(v) = self.kl.get(&state) {
            return *v;
        }
        let lp = self.log_probs(policy, state).to_vec();
        let lr = reference.log_probs(state);
        let value = lp
            .iter()
            .zip(&lr)
            .map(|(p, r)| p.exp() * (p - r))
            .sum::<f64>()
            .max(0.0);
        self.kl.insert(state, value);
        value
    }
}

/// Computes the clipped surrogate loss with KL regularization and its
/// exact gradient over the policy logits.
///
/// Per unmasked token: min(ratio * A_i, clip(ratio, 1-eps, 1+eps) * A_i)
/// with ratio = exp(logprob_policy - logprob_old). The KL term is the
/// exact categorical KL(policy || reference) at the token's state.
/// Masked positions contribute nothing to either term, so logits that
/// only feed masked positions get exactly zero gradient.
pub fn grpo_loss(
    group: &RolloutGroup,
    policy: &ToyPolicy,
    reference: &ToyPolicy,
    config: &GRPOConfig,
) -> Result<GrpoLoss, GrpoError> {
    group.check_shapes()?;
    let group_size = group.rollouts.len() as f64;
    let eps = config.clip_epsilon;
    let beta = config.kl_beta;
    let mut cache = StateCache::new();
    let mut grad = PolicyGrad::zeros_like(policy);
    let mut surrogate_sum = 0.0;
    let mut kl_sum = 0.0;

    for (i, rollout) in group.rollouts.iter().enumerate() {
        let advantage = group.advantages[i];
        let unmasked: Vec<usize> = (0..rollout.steps.len())
            .filter(|t| rollout.mask[*t])
            .collect();
        if unmasked.is_empty() {
            continue;
        }
        let token_weight = 1.0 / unmasked.len() as f64;

        for &t in &unmasked {
            let step = rollout.steps[t];
            let log_probs = cache.log_probs(policy, step.state).to_vec();
            let probs: Vec<f64> = log_probs.iter().map(|lp| lp.exp()).collect();
            let lp = log_probs[step.action];
            let ratio = (lp - rollout.logprobs_old[t]).exp();
            let clipped = ratio.clamp(1.0 - eps, 1.0 + eps);
            let surr_unclipped = ratio * advantage;
            let surr_clipped = clipped * advantage;
            // The unclipped branch is active (and carries gradient)
            // whenever it attains the min; inside the clip window both
            // branches coincide.
            let (surr, dsurr_dlogp) = if surr_unclipped <= surr_clipped {
                (surr_unclipped, ratio * advantage)
            } else {
                (surr_clipped, 0.0)
            };
            surrogate_sum += token_weight * surr / group_size;
            if dsurr_dlogp != 0.0 {
                // d(-surr)/dz[s,b] = -w * dsurr * (1[b=a] - pi(b|s))
                let factor = -token_weight * dsurr_dlogp / group_size;
                for (b, p) in probs.iter().enumerate() {
                    let indicator = if b == step.action { 1.0 } else { 0.0 };
                    grad.add(step.state, b, factor * (indicator - p));
                }
            }

            if beta != 0.0 {
                let kl_state = cache.kl(policy, reference, step.state);
                kl_sum += token_weight * kl_state / group_size;
                let factor = beta * token_weight / group_size;
                let ref_log_probs = reference.log_probs(step.state);
                for b in 0..probs.len() {
                    let diff = log_probs[b] - ref_log_probs[b];
                    grad.add(step.state, b, factor * probs[b] * (diff - kl_state));
                }
            } else {
                let kl_state = cache.kl(policy, reference, step.state);
                kl_sum += token_weight * kl_state / group_size;
            }
        }
    }

    let loss = -surrogate_sum + beta * kl_sum;
    Ok(GrpoLoss {
        loss,
        surrogate: surrogate_sum,
        kl: kl_sum,
        grad,
    })
}

/// One plain gradient-descent step on the logits; pure function.
pub fn apply_update(policy: &ToyPolicy, grad: &PolicyGrad, learning_rate: f64) -> ToyPolicy {
    let mut updated = policy.clone();
    for state in 0..policy.n_states() {
        for action in 0..policy.n_actions() {
            let value = policy.logit(state, action) - learning_rate * grad.get(state, action);
            updated.set_logit(state, action, value);
        }
    }
    updated
}
