//! Grader and behavior-count prompt templates with
//! `$query`/`$solution`/`$checklist`/`$response`/`$cot` slots.

use crate::agent::render_template;
use crate::dataset::QARecord;

const LOOSE_GRADER: &str = include_str!("../../templates/loose_grader.txt");
const STRICT_GRADERS: [&str; 3] = [
    include_str!("../../templates/strict_grader_1.txt"),
    include_str!("../../templates/strict_grader_2.txt"),
    include_str!("../../templates/strict_grader_3.txt"),
];

pub const BEHAVIOR_REFLECTION: &str = include_str!("../../templates/behavior_reflection.txt");
pub const BEHAVIOR_CONFLICT: &str = include_str!("../../templates/behavior_conflict.txt");
pub const BEHAVIOR_VERIFICATION: &str = include_str!("../../templates/behavior_verification.txt");

/// Checklist entries rendered one per line; "无" when empty.
fn render_checklist(checklist: &[String]) -> String {
    if checklist.is_empty() {
        "无".to_string()
    } else {
        checklist
            .iter()
            .enumerate()
            .map(|(i, item)| format!("{}. {}", i + 1, item))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

pub fn render_loose_prompt(record: &QARecord, answer: &str) -> String {
    render_template(
        LOOSE_GRADER,
        &[
            ("query", &record.question),
            ("solution", &record.solution),
            ("checklist", &render_checklist(&record.checklist)),
            ("response", answer),
        ],
    )
}

/// Renders one of the three distinct strict prompts (`round` is
/// 1-based).
pub fn render_strict_prompt(round: u8, record: &QARecord, answer: &str) -> String {
    let template = STRICT_GRADERS[(round as usize - 1).min(2)];
    render_template(
        template,
        &[
            ("query", &record.question),
            ("solution", &record.solution),
            ("checklist", &render_checklist(&record.checklist)),
            ("response", answer),
        ],
    )
}

pub fn render_behavior_prompt(template: &str, record: &QARecord, cot: &str) -> String {
    render_template(
        template,
        &[
            ("query", &record.question),
            ("cot", cot),
            ("solution", &record.solution),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Category, QuestionId};

    fn record() -> QARecord {
        QARecord {
            id: QuestionId::new("r"),
            question: "问题Q".into(),
            solution: "答案S".into(),
            checklist: vec!["要点一".into(), "要点二".into()],
            category: Category::Other,
            difficulty: None,
            language: "zh".into(),
        }
    }

    #[test]
    fn loose_prompt_fills_all_slots() {
        let p = render_loose_prompt(&record(), "候选回答R");
        for needle in ["问题Q", "答案S", "1. 要点一", "2. 要点二", "候选回答R", "得分"] {
            assert!(p.contains(needle), "missing {needle}");
        }
        assert!(!p.contains("$query"));
        assert!(!p.contains("$response"));
    }

    #[test]
    fn strict_prompts_are_three_distinct_templates() {
        let r = record();
        let p1 = render_strict_prompt(1, &r, "a");
        let p2 = render_strict_prompt(2, &r, "a");
        let p3 = render_strict_prompt(3, &r, "a");
        assert_ne!(p1, p2);
        assert_ne!(p2, p3);
        for p in [&p1, &p2, &p3] {
            assert!(p.contains("回复正确性"));
            assert!(p.contains("问题Q"));
        }
    }

    #[test]
    fn behavior_prompt_carries_cot() {
        let p = render_behavior_prompt(BEHAVIOR_REFLECTION, &record(), "思维链内容");
        assert!(p.contains("思维链内容"));
        assert!(p.contains("<count></count>"));
    }

    #[test]
    fn empty_checklist_renders_placeholder() {
        let mut r = record();
        r.checklist.clear();
        let p = render_loose_prompt(&r, "a");
        assert!(p.contains("[回答规范开始]\n无\n"));
    }
}
