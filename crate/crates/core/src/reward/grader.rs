//! Judge-backed grading and verdict parsing.

use super::templates::{render_loose_prompt, render_strict_prompt};
use super::{
    extra_search_bonus, format_reward, verdict_reward, GraderMode, RewardBreakdown, Verdict,
};
use crate::agent::Trajectory;
use crate::backends::{JudgeBackend, JudgeKind, JudgeRequest};
use crate::dataset::QARecord;
use crate::error::GradeError;

/// Pulls the integer score out of a loose-grader verdict. The judge is
/// asked for `{"打分理由": ..., "得分": n}`; any integer following the
/// last score key is accepted and clamped into 1..=10.
pub fn parse_loose_score(text: &str) -> Result<i32, GradeError> {
    let key = "得分";
    let pos = text
        .rfind(key)
        .ok_or_else(|| GradeError::VerdictParse(format!("no `{key}` field")))?;
    let tail = &text[pos + key.len()..];
    let digits: String = tail
        .chars()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect();
    if digits.is_empty() {
        return Err(GradeError::VerdictParse(format!(
            "no integer after `{key}`"
        )));
    }
    let score: i64 = digits
        .parse()
        .map_err(|_| GradeError::VerdictParse("score overflow".into()))?;
    Ok(score.clamp(1, 10) as i32)
}

/// Pulls the boolean out of a strict-grader verdict of the form
/// `{"回复正确性": "正确"/"错误"}`.
pub fn parse_strict_verdict(text: &str) -> Result<bool, GradeError> {
    let key = "回复正确性";
    let pos = text
        .rfind(key)
        .ok_or_else(|| GradeError::VerdictParse(format!("no `{key}` field")))?;
    let tail = &text[pos + key.len()..];
    let correct = tail.find("正确");
    let wrong = tail.find("错误");
    match (correct, wrong) {
        (Some(c), Some(w)) => Ok(c < w),
        (Some(_), None) => Ok(true),
        (None, Some(_)) => Ok(false),
        (None, None) => Err(GradeError::VerdictParse(format!(
            "no verdict after `{key}`"
        ))),
    }
}

fn ask(judge: &dyn JudgeBackend, req: &JudgeRequest<'_>) -> Result<String, GradeError> {
    Ok(judge.verdict(req)?)
}

/// Grades an answer against a record.
///
/// Loose mode issues one scoring call; strict mode issues three calls
/// with the three distinct verdict prompts. An unparseable verdict is
/// re-asked once and then treated as negative for that round. Backend
/// failures propagate.
pub fn grade(
    record: &QARecord,
    answer: &str,
    mode: GraderMode,
    judge: &dyn JudgeBackend,
) -> Result<Verdict, GradeError> {
    match mode {
        GraderMode::Loose => {
            let req = JudgeRequest {
                prompt: render_loose_prompt(record, answer),
                kind: JudgeKind::Loose,
                record,
                candidate: answer,
            };
            let text = ask(judge, &req)?;
            let score = match parse_loose_score(&text) {
                Ok(score) => score,
                Err(_) => {
                    let retry = ask(judge, &req)?;
                    parse_loose_score(&retry).unwrap_or(1)
                }
            };
            Ok(Verdict::Loose {
                score,
                rationale: text,
            })
        }
        GraderMode::Strict => {
            let mut judgments = [false; 3];
            for round in 1..=3u8 {
                let req = JudgeRequest {
                    prompt: render_strict_prompt(round, record, answer),
                    kind: JudgeKind::Strict { round },
                    record,
                    candidate: answer,
                };
                let text = ask(judge, &req)?;
                let value = match parse_strict_verdict(&text) {
                    Ok(v) => v,
                    Err(_) => {
                        let retry = ask(judge, &req)?;
                        parse_strict_verdict(&retry).unwrap_or(false)
                    }
                };
                judgments[(round - 1) as usize] = value;
            }
            Ok(Verdict::Strict { judgments })
        }
    }
}

/// One rollout's grading outcome within a group.
#[derive(Debug, Clone)]
pub struct GradedRollout {
    pub breakdown: RewardBreakdown,
    /// Absent when the rollout produced no answer to grade.
    pub verdict: Option<Verdict>,
}

/// Rewards for a complete rollout group.
#[derive(Debug, Clone)]
pub struct GradedGroup {
    pub rollouts: Vec<GradedRollout>,
}

impl GradedGroup {
    pub fn totals(&self) -> Vec<f64> {
        self.rollouts.iter().map(|r| r.breakdown.total).collect()
    }

    /// Scores a rollout group: format gate and graded accuracy per
    /// rollout, then the group-level search bonus. Capped and failed
    /// rollouts skip grading and score zero accuracy.
    pub fn score(
        record: &QARecord,
        group: &[Trajectory],
        mode: GraderMode,
        judge: &dyn JudgeBackend,
        strict_format: bool,
    ) -> Result<Self, GradeError> {
        let mut formats = Vec::with_capacity(group.len());
        let mut accuracies = Vec::with_capacity(group.len());
        let mut verdicts = Vec::with_capacity(group.len());
        for trajectory in group {
            formats.push(format_reward(trajectory, strict_format));
            match &trajectory.final_answer {
                Some(answer) => {
                    let verdict = grade(record, answer, mode, judge)?;
                    accuracies.push(verdict_reward(&verdict));
                    verdicts.push(Some(verdict));
                }
                None => {
                    accuracies.push(0.0);
                    verdicts.push(None);
                }
            }
        }
        let pairs: Vec<(bool, bool)> = group
            .iter()
            .zip(&accuracies)
            .map(|(t, acc)| (t.used_search, *acc == 1.0))
            .collect();
        let bonuses = extra_search_bonus(&pairs);
        let rollouts = group
            .iter()
            .enumerate()
            .map(|(i, _)| GradedRollout {
                breakdown: RewardBreakdown::compose(formats[i], accuracies[i], bonuses[i]),
                verdict: verdicts[i].clone(),
            })
            .collect();
        Ok(Self { rollouts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{TerminatedBy, Trajectory};
    use crate::backends::ScriptedJudge;
    use crate::dataset::{Category, QARecord, QuestionId};

    fn record() -> QARecord {
        QARecord {
            id: QuestionId::new("r"),
            question: "q".into(),
            solution: "solution".into(),
            checklist: vec![],
            category: Category::Other,
            difficulty: None,
            language: "zh".into(),
        }
    }

    #[test]
    fn loose_parse_path() {
        let judge = ScriptedJudge::from_queue(vec![
            "第一步，分析：还行。\n第二步，json输出：\n{\"打分理由\": \"基本一致\", \"得分\": 7,}".into(),
        ]);
        let verdict = grade(&record(), "answer", GraderMode::Loose, &judge).unwrap();
        assert!(matches!(verdict, Verdict::Loose { score: 7, .. }));
    }

    #[test]
    fn strict_three_rounds_majority() {
        let judge = ScriptedJudge::from_queue(vec![
            "{\"回复正确性\": \"正确\"}".into(),
            "{\"回复正确性\": \"错误\"}".into(),
            "第二步，评判结果：{\"回复正确性\": \"正确\"}".into(),
        ]);
        let verdict = grade(&record(), "answer", GraderMode::Strict, &judge).unwrap();
        assert_eq!(
            verdict,
            Verdict::Strict {
                judgments: [true, false, true]
            }
        );
        assert_eq!(verdict_reward(&verdict), 1.0);
    }

    #[test]
    fn unparseable_verdict_reasks_once_then_goes_negative() {
        // Loose: garbage twice -> score 1.
        let judge = ScriptedJudge::from_queue(vec!["???".into(), "still ???".into()]);
        let verdict = grade(&record(), "a", GraderMode::Loose, &judge).unwrap();
        assert!(matches!(verdict, Verdict::Loose { score: 1, .. }));
        assert_eq!(judge.served().len(), 2);

        // Loose: garbage then good -> parsed on the retry.
        let judge = ScriptedJudge::from_queue(vec!["???".into(), "\"得分\": 9".into()]);
        let verdict = grade(&record(), "a", GraderMode::Loose, &judge).unwrap();
        assert!(matches!(verdict, Verdict::Loose { score: 9, .. }));

        // Strict: one bad round degrades to false, others unaffected.
        let judge = ScriptedJudge::from_queue(vec![
            "{\"回复正确性\": \"正确\"}".into(),
            "bogus".into(),
            "more bogus".into(),
            "{\"回复正确性\": \"正确\"}".into(),
        ]);
        let verdict = grade(&record(), "a", GraderMode::Strict, &judge).unwrap();
        assert_eq!(
            verdict,
            Verdict::Strict {
                judgments: [true, false, true]
            }
        );
    }

    #[test]
    fn score_clamped_into_range() {
        assert_eq!(parse_loose_score("得分: 15").unwrap(), 10);
        assert_eq!(parse_loose_score("得分：0").unwrap(), 1);
        assert!(parse_loose_score("没有分数").is_err());
    }

    #[test]
    fn strict_verdict_ignores_key_inside_itself() {
        assert!(parse_strict_verdict("{\"回复正确性\": \"正确\"}").unwrap());
        assert!(!parse_strict_verdict("{\"回复正确性\": \"错误\"}").unwrap());
        assert!(parse_strict_verdict("回复正确性如下，嗯").is_err());
    }

    fn answered(used_search: bool, answer: &str) -> Trajectory {
        Trajectory {
            record_id: QuestionId::new("r"),
            rounds: vec![],
            final_answer: Some(answer.into()),
            terminated_by: TerminatedBy::Answered,
            token_spans: vec![],
            used_search,
            warnings: vec![],
        }
    }

    fn capped(used_search: bool) -> Trajectory {
        Trajectory {
            record_id: QuestionId::new("r"),
            rounds: vec![],
            final_answer: None,
            terminated_by: TerminatedBy::RoundCapExceeded,
            token_spans: vec![],
            used_search,
            warnings: vec![],
        }
    }

    #[test]
    fn group_scoring_pays_bonus_only_to_searched_successes() {
        let judge = super::super::OracleJudge::exact();
        let group = vec![
            answered(false, "wrong"),
            capped(false),
            answered(true, "solution"),
            answered(true, "wrong too"),
        ];
        let graded =
            GradedGroup::score(&record(), &group, GraderMode::Strict, &judge, false).unwrap();
        let totals = graded.totals();
        assert_eq!(totals, vec![0.0, 0.0, 2.0, 0.0]);
        // Capped rollout was never graded.
        assert!(graded.rollouts[1].verdict.is_none());
    }
}
