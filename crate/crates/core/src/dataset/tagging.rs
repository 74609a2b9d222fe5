//! Difficulty tagging: four scripted attempts per record, graded
//! strictly, mapped onto a difficulty tag.

use super::{Difficulty, QARecord};
use crate::agent::{run_episode_opts, AgentConfig, EpisodeOptions};
use crate::backends::{ChatBackend, JudgeBackend};
use crate::error::DataError;
use crate::reward::{grade, strict_reward, GraderMode, Verdict};
use crate::search::SearchBackend;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Number of grading attempts behind a difficulty tag.
pub const TAGGING_ATTEMPTS: usize = 4;

/// Maps the number of correct answers out of the four tests onto a
/// difficulty: 4 is easy, 2-3 medium, 1 hard, 0 an outlier.
pub fn tag_difficulty(n_correct: usize) -> Result<Difficulty, DataError> {
    match n_correct {
        4 => Ok(Difficulty::Easy),
        2 | 3 => Ok(Difficulty::Medium),
        1 => Ok(Difficulty::Hard),
        0 => Ok(Difficulty::Outlier),
        other => Err(DataError::Validation(format!(
            "n_correct {other} outside 0..=4"
        ))),
    }
}

/// Audit row for one tagging attempt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptAudit {
    pub id: String,
    pub attempt: usize,
    pub answer: Option<String>,
    pub judgments: Vec<bool>,
    pub correct: bool,
}

/// Tagged records plus the per-attempt audit trail.
#[derive(Debug, Clone)]
pub struct TaggingOutcome {
    pub records: Vec<QARecord>,
    pub audits: Vec<AttemptAudit>,
    pub warnings: Vec<String>,
}

/// Runs the tagging pipeline: each record is attempted exactly four
/// times through the episode loop; an attempt counts as correct when
/// the strict grader accepts its answer. Backend failures mark the
/// attempt incorrect and are reported as warnings. Output order is
/// deterministic regardless of worker scheduling.
pub fn run_tagging(
    records: &[QARecord],
    agent_config: &AgentConfig,
    model: &dyn ChatBackend,
    search: &dyn SearchBackend,
    judge: &dyn JudgeBackend,
) -> TaggingOutcome {
    let per_record: Vec<(QARecord, Vec<AttemptAudit>, Vec<String>)> = records
        .par_iter()
        .map(|record| {
            let mut audits = Vec::with_capacity(TAGGING_ATTEMPTS);
            let mut warnings = Vec::new();
            for attempt in 1..=TAGGING_ATTEMPTS {
                let trajectory = run_episode_opts(
                    record,
                    model,
                    search,
                    agent_config,
                    EpisodeOptions {
                        attempt,
                        search_enabled: true,
                    },
                );
                for w in &trajectory.warnings {
                    warnings.push(format!("{} attempt {attempt}: {w}", record.id));
                }
                let (judgments, correct) = match &trajectory.final_answer {
                    Some(answer) => {
                        match grade(record, answer, GraderMode::Strict, judge) {
                            Ok(Verdict::Strict { judgments }) => {
                                (judgments.to_vec(), strict_reward(&judgments) == 1.0)
                            }
                            Ok(Verdict::Loose { .. }) => unreachable!("strict grading requested"),
                            Err(e) => {
                                warnings.push(format!(
                                    "{} attempt {attempt}: judge error, marking incorrect: {e}",
                                    record.id
                                ));
                                (Vec::new(), false)
                            }
                        }
                    }
                    None => (Vec::new(), false),
                };
                audits.push(AttemptAudit {
                    id: record.id.to_string(),
                    attempt,
                    answer: trajectory.final_answer.clone(),
                    judgments,
                    correct,
                });
            }
            let n_correct = audits.iter().filter(|a| a.correct).count();
            let mut tagged = record.clone();
            tagged.difficulty = Some(tag_difficulty(n_correct).expect("attempts bounded by 4"));
            (tagged, audits, warnings)
        })
        .collect();

    let mut records_out = Vec::with_capacity(per_record.len());
    let mut audits_out = Vec::new();
    let mut warnings_out = Vec::new();
    for (record, audits, warnings) in per_record {
        records_out.push(record);
        audits_out.extend(audits);
        warnings_out.extend(warnings);
    }
    TaggingOutcome {
        records: records_out,
        audits: audits_out,
        warnings: warnings_out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{serialize_action, Action};
    use crate::backends::{ScriptedBackend, ScriptedTurn};
    use crate::dataset::{Category, QuestionId};
    use crate::reward::OracleJudge;
    use crate::search::NoopSearch;

    #[test]
    fn tag_mapping_is_exact() {
        assert_eq!(tag_difficulty(4).unwrap(), Difficulty::Easy);
        assert_eq!(tag_difficulty(3).unwrap(), Difficulty::Medium);
        assert_eq!(tag_difficulty(2).unwrap(), Difficulty::Medium);
        assert_eq!(tag_difficulty(1).unwrap(), Difficulty::Hard);
        assert_eq!(tag_difficulty(0).unwrap(), Difficulty::Outlier);
        assert!(tag_difficulty(5).is_err());
    }

    fn record(id: &str) -> QARecord {
        QARecord {
            id: QuestionId::new(id),
            question: "q".into(),
            solution: "正解".into(),
            checklist: vec![],
            category: Category::Other,
            difficulty: None,
            language: "zh".into(),
        }
    }

    fn answer_turn(text: &str) -> String {
        serialize_action("想", &Action::Answer { text: text.into() })
    }

    /// Scripts `correct_attempts` of the 4 attempts to produce the
    /// right answer.
    fn script(id: &str, correct_attempts: usize) -> Vec<ScriptedTurn> {
        (1..=TAGGING_ATTEMPTS)
            .map(|attempt| ScriptedTurn {
                id: id.to_string(),
                attempt,
                round: 1,
                text: if attempt <= correct_attempts {
                    answer_turn("正解")
                } else {
                    answer_turn("不对")
                },
            })
            .collect()
    }

    #[test]
    fn always_correct_tags_easy_once_correct_tags_hard() {
        let mut turns = script("a", 4);
        turns.extend(script("b", 1));
        let model = ScriptedBackend::new(turns);
        let outcome = run_tagging(
            &[record("a"), record("b")],
            &AgentConfig::default(),
            &model,
            &NoopSearch,
            &OracleJudge::exact(),
        );
        assert_eq!(outcome.records[0].difficulty, Some(Difficulty::Easy));
        assert_eq!(outcome.records[1].difficulty, Some(Difficulty::Hard));
    }

    #[test]
    fn three_record_fixture_maps_to_expected_tags() {
        let mut turns = script("a", 4);
        turns.extend(script("b", 2));
        turns.extend(script("c", 0));
        let model = ScriptedBackend::new(turns);
        let records = vec![record("a"), record("b"), record("c")];
        let outcome = run_tagging(
            &records,
            &AgentConfig::default(),
            &model,
            &NoopSearch,
            &OracleJudge::exact(),
        );
        let tags: Vec<_> = outcome
            .records
            .iter()
            .map(|r| r.difficulty.unwrap())
            .collect();
        assert_eq!(
            tags,
            vec![Difficulty::Easy, Difficulty::Medium, Difficulty::Outlier]
        );
    }

    #[test]
    fn exactly_four_attempts_per_record() {
        let model = ScriptedBackend::new(script("a", 4));
        let outcome = run_tagging(
            &[record("a")],
            &AgentConfig::default(),
            &model,
            &NoopSearch,
            &OracleJudge::exact(),
        );
        assert_eq!(outcome.audits.len(), TAGGING_ATTEMPTS);
        let attempts: Vec<usize> = outcome.audits.iter().map(|a| a.attempt).collect();
        assert_eq!(attempts, vec![1, 2, 3, 4]);
    }

    #[test]
    fn backend_failure_counts_attempt_incorrect() {
        // Only attempts 1-2 scripted; 3-4 exhaust the script.
        let turns: Vec<ScriptedTurn> = (1..=2)
            .map(|attempt| ScriptedTurn {
                id: "a".into(),
                attempt,
                round: 1,
                text: answer_turn("正解"),
            })
            .collect();
        let model = ScriptedBackend::new(turns);
        let outcome = run_tagging(
            &[record("a")],
            &AgentConfig::default(),
            &model,
            &NoopSearch,
            &OracleJudge::exact(),
        );
        assert_eq!(outcome.records[0].difficulty, Some(Difficulty::Medium));
        assert!(!outcome.warnings.is_empty());
        assert_eq!(outcome.audits.iter().filter(|a| a.correct).count(), 2);
    }

    #[test]
    fn audit_field_names_are_stable() {
        let audit = AttemptAudit {
            id: "a".into(),
            attempt: 1,
            answer: None,
            judgments: vec![true, false, true],
            correct: true,
        };
        let json = serde_json::to_value(&audit).unwrap();
        let obj = json.as_object().unwrap();
        for key in ["id", "attempt", "answer", "judgments", "correct"] {
            assert!(obj.contains_key(key));
        }
    }
}
