//! Behavior statistics: judge-counted occurrences of three reasoning
//! patterns in rollout chains. Evidence gathering is deliberately not
//! counted.

use crate::agent::{Action, Trajectory};
use crate::backends::{JudgeBackend, JudgeKind, JudgeRequest};
use crate::dataset::QARecord;
use crate::error::DataError;
use crate::reward::{
    render_behavior_prompt, BEHAVIOR_CONFLICT, BEHAVIOR_REFLECTION, BEHAVIOR_VERIFICATION,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Mean occurrences per rollout of each counted behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorCounts {
    pub reflection_correction: f64,
    pub conflict_resolution: f64,
    pub verification_denoising: f64,
}

const BEHAVIORS: [(&str, &str); 3] = [
    ("reflection_correction", BEHAVIOR_REFLECTION),
    ("conflict_resolution", BEHAVIOR_CONFLICT),
    ("verification_denoising", BEHAVIOR_VERIFICATION),
];

/// Renders a trajectory's reasoning chain for the counting prompts:
/// each round's thinking, with the queries it went on to issue.
pub fn render_cot(trajectory: &Trajectory) -> String {
    let mut out = String::new();
    for round in &trajectory.rounds {
        out.push_str(&format!("【第{}轮思考】\n{}\n", round.index, round.reasoning));
        if let Action::Search { queries } = &round.action {
            out.push_str(&format!("【第{}轮检索】{:?}\n", round.index, queries));
        }
    }
    out
}

/// Parses the integer between the last pair of count tags.
pub fn parse_count(text: &str) -> Option<u64> {
    let open = text.rfind("<count>")?;
    let rest = &text[open + "<count>".len()..];
    let close = rest.find("</count>")?;
    rest[..close].trim().parse().ok()
}

/// Counts the three behaviors over a set of trajectories. Each
/// (trajectory, behavior) pair costs one judge call; unparseable
/// counts are re-asked once and then treated as zero with a warning.
pub fn behavior_stats(
    trajectories: &[Trajectory],
    records: &HashMap<String, QARecord>,
    judge: &dyn JudgeBackend,
) -> Result<(BehaviorCounts, Vec<String>), DataError> {
    let mut sums = [0.0f64; 3];
    let mut warnings = Vec::new();
    if trajectories.is_empty() {
        return Ok((
            BehaviorCounts {
                reflection_correction: 0.0,
                conflict_resolution: 0.0,
                verification_denoising: 0.0,
            },
            warnings,
        ));
    }

    for trajectory in trajectories {
        let record = records.get(trajectory.record_id.as_str()).ok_or_else(|| {
            DataError::Validation(format!(
                "trajectory references unknown record {}",
                trajectory.record_id
            ))
        })?;
        let cot = render_cot(trajectory);
        for (slot, (name, template)) in BEHAVIORS.iter().enumerate() {
            let req = JudgeRequest {
                prompt: render_behavior_prompt(template, record, &cot),
                kind: JudgeKind::Behavior { name },
                record,
                candidate: &cot,
            };
            let count = match judge.verdict(&req) {
                Ok(text) => match parse_count(&text) {
                    Some(count) => count,
                    None => match judge.verdict(&req) {
                        Ok(retry) => parse_count(&retry).unwrap_or_else(|| {
                            warnings.push(format!(
                                "{} {name}: unparseable count, treating as 0",
                                record.id
                            ));
                            0
                        }),
                        Err(e) => {
                            warnings.push(format!("{} {name}: judge error: {e}", record.id));
                            0
                        }
                    },
                },
                Err(e) => {
                    warnings.push(format!("{} {name}: judge error: {e}", record.id));
                    0
                }
            };
            sums[slot] += count as f64;
        }
    }

    let n = trajectories.len() as f64;
    Ok((
        BehaviorCounts {
            reflection_correction: sums[0] / n,
            conflict_resolution: sums[1] / n,
            verification_denoising: sums[2] / n,
        },
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{Round, TerminatedBy};
    use crate::backends::ScriptedJudge;
    use crate::dataset::{Category, QuestionId};

    fn record(id: &str) -> QARecord {
        QARecord {
            id: QuestionId::new(id),
            question: "q".into(),
            solution: "s".into(),
            checklist: vec![],
            category: Category::Other,
            difficulty: None,
            language: "zh".into(),
        }
    }

    fn trajectory(id: &str) -> Trajectory {
        Trajectory {
            record_id: QuestionId::new(id),
            rounds: vec![
                Round {
                    index: 1,
                    reasoning: "先查证".into(),
                    action: Action::Search {
                        queries: vec!["q1".into()],
                    },
                    documents: vec![],
                },
                Round {
                    index: 2,
                    reasoning: "修正结论".into(),
                    action: Action::Answer { text: "答".into() },
                    documents: vec![],
                },
            ],
            final_answer: Some("答".into()),
            terminated_by: TerminatedBy::Answered,
            token_spans: vec![],
            used_search: true,
            warnings: vec![],
        }
    }

    fn records_map(ids: &[&str]) -> HashMap<String, QARecord> {
        ids.iter().map(|id| (id.to_string(), record(id))).collect()
    }

    #[test]
    fn empty_input_gives_zero_means() {
        let judge = ScriptedJudge::constant("<count>5</count>");
        let (counts, warnings) = behavior_stats(&[], &records_map(&[]), &judge).unwrap();
        assert_eq!(counts.reflection_correction, 0.0);
        assert_eq!(counts.conflict_resolution, 0.0);
        assert_eq!(counts.verification_denoising, 0.0);
        assert!(warnings.is_empty());
    }

    #[test]
    fn constant_count_two_gives_mean_two() {
        let judge = ScriptedJudge::constant("分析... <count>2</count>");
        let trajectories = vec![trajectory("a"), trajectory("b"), trajectory("c")];
        let (counts, _) =
            behavior_stats(&trajectories, &records_map(&["a", "b", "c"]), &judge).unwrap();
        assert_eq!(counts.reflection_correction, 2.0);
        assert_eq!(counts.conflict_resolution, 2.0);
        assert_eq!(counts.verification_denoising, 2.0);
        assert_eq!(judge.served().len(), 9);
    }

    #[test]
    fn mixed_counts_match_hand_computed_means() {
        let mut keyed = HashMap::new();
        for (id, counts) in [("a", [1u64, 0, 3]), ("b", [2, 2, 1])] {
            for (name, c) in ["reflection_correction", "conflict_resolution", "verification_denoising"]
                .iter()
                .zip(counts)
            {
                keyed.insert(
                    (id.to_string(), format!("behavior:{name}")),
                    format!("<count>{c}</count>"),
                );
            }
        }
        let judge = ScriptedJudge::keyed(keyed);
        let trajectories = vec![trajectory("a"), trajectory("b")];
        let (counts, _) = behavior_stats(&trajectories, &records_map(&["a", "b"]), &judge).unwrap();
        assert_eq!(counts.reflection_correction, 1.5);
        assert_eq!(counts.conflict_resolution, 1.0);
        assert_eq!(counts.verification_denoising, 2.0);
    }

    #[test]
    fn unparseable_count_reasks_then_zeroes() {
        let judge = ScriptedJudge::from_queue(vec![
            // Three behaviors for one trajectory; first behavior needs
            // the retry, second stays unparseable, third is fine.
            "gibberish".into(),
            "<count>4</count>".into(),
            "no tags".into(),
            "still no tags".into(),
            "<count>1</count>".into(),
        ]);
        let trajectories = vec![trajectory("a")];
        let (counts, warnings) =
            behavior_stats(&trajectories, &records_map(&["a"]), &judge).unwrap();
        assert_eq!(counts.reflection_correction, 4.0);
        assert_eq!(counts.conflict_resolution, 0.0);
        assert_eq!(counts.verification_denoising, 1.0);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn unknown_record_is_a_validation_error() {
        let judge = ScriptedJudge::constant("<count>0</count>");
        let err = behavior_stats(&[trajectory("ghost")], &records_map(&["a"]), &judge);
        assert!(err.is_err());
    }

    #[test]
    fn count_parser_takes_last_tag_pair() {
        assert_eq!(parse_count("<count>3</count>"), Some(3));
        assert_eq!(parse_count("x <count>1</count> y <count> 7 </count>"), Some(7));
        assert_eq!(parse_count("<count>abc</count>"), None);
        assert_eq!(parse_count("no tags"), None);
    }
}
