//! A tiny seek-or-answer environment. Each task hides one correct
//! answer token; searching deterministically reveals it by moving the
//! policy into that answer's revealed state. Tasks answerable without
//! search share a conventional answer the policy can learn outright.

use super::{ToyPolicy, TokenStep};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// State index of the pre-search state.
pub const STATE_START: usize = 0;
/// Action index of the search action; answers are 1..=num_answers.
pub const ACTION_SEARCH: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyTask {
    /// Correct answer token, in 1..=num_answers.
    pub answer: usize,
    pub answerable_without_search: bool,
}

/// Task pool plus the state/action geometry derived from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToySeekEnv {
    pub tasks: Vec<ToyTask>,
    pub num_answers: usize,
    /// Actions per rollout before it is cut off unanswered.
    pub max_rounds: usize,
}

impl ToySeekEnv {
    /// Generates a pool where roughly `frac_needs_search` of tasks hide
    /// a uniformly random answer (unguessable from the start state) and
    /// the rest carry the conventional answer 1.
    pub fn generate(
        num_tasks: usize,
        frac_needs_search: f64,
        num_answers: usize,
        max_rounds: usize,
        seed: u64,
    ) -> Self {
        assert!(num_answers >= 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let needs_search_count = (num_tasks as f64 * frac_needs_search).round() as usize;
        let tasks = (0..num_tasks)
            .map(|i| {
                if i < needs_search_count {
                    ToyTask {
                        answer: rng.random_range(1..=num_answers),
                        answerable_without_search: false,
                    }
                } else {
                    ToyTask {
                        answer: 1,
                        answerable_without_search: true,
                    }
                }
            })
            .collect();
        Self {
            tasks,
            num_answers,
            max_rounds,
        }
    }

    /// Start state plus one revealed state per answer token.
    pub fn n_states(&self) -> usize {
        1 + self.num_answers
    }

    /// Search plus one answer action per token.
    pub fn n_actions(&self) -> usize {
        1 + self.num_answers
    }

    pub fn fraction_needing_search(&self) -> f64 {
        if self.tasks.is_empty() {
            return 0.0;
        }
        self.tasks
            .iter()
            .filter(|t| !t.answerable_without_search)
            .count() as f64
            / self.tasks.len() as f64
    }
}

/// One simulated rollout.
#[derive(Debug, Clone)]
pub struct ToyRollout {
    pub steps: Vec<TokenStep>,
    /// Answer token emitted, if the rollout answered within the cap.
    pub answered: Option<usize>,
    pub used_search: bool,
    pub search_calls: usize,
}

impl ToyRollout {
    pub fn answered_correctly(&self, task: &ToyTask) -> bool {
        self.answered == Some(task.answer)
    }
}

/// Plays one rollout: sample actions from the policy, transitioning to
/// the task's revealed state on search, until an answer or the round
/// cap.
pub fn simulate_rollout(
    env: &ToySeekEnv,
    task: &ToyTask,
    policy: &ToyPolicy,
    rng: &mut impl Rng,
) -> ToyRollout {
    let mut state = STATE_START;
    let mut steps = Vec::new();
    let mut answered = None;
    let mut used_search = false;
    let mut search_calls = 0;
    for _ in 0..env.max_rounds {
        let action = policy.sample(state, rng);
        steps.push(TokenStep { state, action });
        if action == ACTION_SEARCH {
            used_search = true;
            search_calls += 1;
            state = task.answer;
        } else {
            answered = Some(action);
            break;
        }
    }
    ToyRollout {
        steps,
        answered,
        used_search,
        search_calls,
    }
}
