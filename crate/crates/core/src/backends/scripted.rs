//! Deterministic scripted backends used by tests, tagging fixtures,
//! and golden runs.

use super::{ChatBackend, ChatMessage, JudgeBackend, JudgeRequest, TurnCtx};
use crate::error::BackendError;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

/// One scripted model turn. `attempt` of 0 (or absent in JSON) matches
/// any attempt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedTurn {
    pub id: String,
    #[serde(default)]
    pub attempt: usize,
    pub round: usize,
    pub text: String,
}

/// Replays model turns keyed by (record, attempt, round). Lookups fall
/// back to the attempt-independent key, and error when no turn is
/// scripted.
pub struct ScriptedBackend {
    turns: HashMap<(String, usize, usize), String>,
}

impl ScriptedBackend {
    pub fn new(turns: Vec<ScriptedTurn>) -> Self {
        let mut map = HashMap::new();
        for turn in turns {
            map.insert((turn.id, turn.attempt, turn.round), turn.text);
        }
        Self { turns: map }
    }

    /// Scripts one record's turns (attempt-independent), rounds 1..=n.
    pub fn single_record(record_id: &str, turns: Vec<String>) -> Self {
        Self::new(
            turns
                .into_iter()
                .enumerate()
                .map(|(i, text)| ScriptedTurn {
                    id: record_id.to_string(),
                    attempt: 0,
                    round: i + 1,
                    text,
                })
                .collect(),
        )
    }

    pub fn load(path: &std::path::Path) -> Result<Self, crate::error::DataError> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::error::DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let turns: Vec<ScriptedTurn> =
            serde_json::from_str(&text).map_err(|e| crate::error::DataError::BadRecord {
                line: 0,
                message: e.to_string(),
            })?;
        Ok(Self::new(turns))
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, ctx: &TurnCtx<'_>, _messages: &[ChatMessage]) -> Result<String, BackendError> {
        let exact = (ctx.record_id.to_string(), ctx.attempt, ctx.round);
        if let Some(text) = self.turns.get(&exact) {
            return Ok(text.clone());
        }
        let any_attempt = (ctx.record_id.to_string(), 0, ctx.round);
        if let Some(text) = self.turns.get(&any_attempt) {
            return Ok(text.clone());
        }
        Err(BackendError::ExhaustedScript {
            record: ctx.record_id.to_string(),
            attempt: ctx.attempt,
            round: ctx.round,
        })
    }
}

/// Scripted judge: answers from a keyed map when a key matches,
/// otherwise pops a FIFO queue. Every served request's key is logged.
pub struct ScriptedJudge {
    keyed: HashMap<(String, String), String>,
    queue: Mutex<VecDeque<String>>,
    log: Mutex<Vec<String>>,
}

impl ScriptedJudge {
    pub fn from_queue(responses: Vec<String>) -> Self {
        Self {
            keyed: HashMap::new(),
            queue: Mutex::new(responses.into()),
            log: Mutex::new(Vec::new()),
        }
    }

    /// Keys are (record id, request tag); see [`super::JudgeKind::tag`].
    pub fn keyed(responses: HashMap<(String, String), String>) -> Self {
        Self {
            keyed: responses,
            queue: Mutex::new(VecDeque::new()),
            log: Mutex::new(Vec::new()),
        }
    }

    /// Same canned response for every request.
    pub fn constant(response: &str) -> Self {
        let mut judge = Self::from_queue(vec![]);
        judge.keyed.insert(("*".into(), "*".into()), response.into());
        judge
    }

    pub fn served(&self) -> Vec<String> {
        self.log.lock().unwrap().clone()
    }
}

impl JudgeBackend for ScriptedJudge {
    fn verdict(&self, req: &JudgeRequest<'_>) -> Result<String, BackendError> {
        let key = (req.record.id.to_string(), req.kind.tag());
        self.log
            .lock()
            .unwrap()
            .push(format!("{}|{}", key.0, key.1));
        if let Some(text) = self.keyed.get(&key) {
            return Ok(text.clone());
        }
        if let Some(text) = self.keyed.get(&("*".to_string(), "*".to_string())) {
            return Ok(text.clone());
        }
        self.queue
            .lock()
            .unwrap()
            .pop_front()
            .ok_or(BackendError::ExhaustedScript {
                record: key.0,
                attempt: 0,
                round: 0,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{JudgeKind, Role};
    use crate::dataset::{Category, QARecord, QuestionId};

    fn ctx<'a>(record: &'a str, round: usize) -> TurnCtx<'a> {
        TurnCtx::new(record, 1, round)
    }

    #[test]
    fn scripted_replays_single_turn() {
        let backend = ScriptedBackend::single_record("r1", vec!["T".into()]);
        let messages = [ChatMessage::new(Role::System, "p")];
        assert_eq!(backend.complete(&ctx("r1", 1), &messages).unwrap(), "T");
    }

    #[test]
    fn second_unscripted_round_is_exhausted() {
        let backend = ScriptedBackend::single_record("r1", vec!["T".into()]);
        let messages = [ChatMessage::new(Role::System, "p")];
        backend.complete(&ctx("r1", 1), &messages).unwrap();
        let err = backend.complete(&ctx("r1", 2), &messages).unwrap_err();
        assert!(matches!(err, BackendError::ExhaustedScript { round: 2, .. }));
    }

    #[test]
    fn attempt_specific_turn_wins_over_fallback() {
        let backend = ScriptedBackend::new(vec![
            ScriptedTurn {
                id: "r1".into(),
                attempt: 0,
                round: 1,
                text: "generic".into(),
            },
            ScriptedTurn {
                id: "r1".into(),
                attempt: 3,
                round: 1,
                text: "third".into(),
            },
        ]);
        let messages = [ChatMessage::new(Role::System, "p")];
        assert_eq!(
            backend
                .complete(&TurnCtx::new("r1", 3, 1), &messages)
                .unwrap(),
            "third"
        );
        assert_eq!(
            backend
                .complete(&TurnCtx::new("r1", 2, 1), &messages)
                .unwrap(),
            "generic"
        );
    }

    fn record() -> QARecord {
        QARecord {
            id: QuestionId::new("r1"),
            question: "q".into(),
            solution: "s".into(),
            checklist: vec![],
            category: Category::Other,
            difficulty: None,
            language: "zh".into(),
        }
    }

    #[test]
    fn scripted_judge_returns_verbatim_verdict() {
        let judge = ScriptedJudge::from_queue(vec!["{\"得分\": 7}".into()]);
        let record = record();
        let req = JudgeRequest {
            prompt: "p".into(),
            kind: JudgeKind::Loose,
            record: &record,
            candidate: "a",
        };
        assert_eq!(judge.verdict(&req).unwrap(), "{\"得分\": 7}");
        assert!(judge.verdict(&req).is_err());
    }

    #[test]
    fn concurrent_judge_calls_all_succeed() {
        let judge = std::sync::Arc::new(ScriptedJudge::constant("ok"));
        let record = std::sync::Arc::new(record());
        let mut handles = Vec::new();
        for _ in 0..8 {
            let judge = judge.clone();
            let record = record.clone();
            handles.push(std::thread::spawn(move || {
                let req = JudgeRequest {
                    prompt: "p".into(),
                    kind: JudgeKind::Strict { round: 1 },
                    record: &record,
                    candidate: "a",
                };
                judge.verdict(&req).unwrap()
            }));
        }
        for handle in handles {
            assert_eq!(handle.join().unwrap(), "ok");
        }
        assert_eq!(judge.served().len(), 8);
    }
}
