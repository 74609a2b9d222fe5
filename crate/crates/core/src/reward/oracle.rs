//! Deterministic oracle judge for tests and desk-scale runs: grades by
//! normalized text matching against the reference answer and
//! checklist-listed aliases, emitting verdicts in the same wire format
//! an LLM judge would.

use crate::backends::{JudgeBackend, JudgeKind, JudgeRequest};
use crate::dataset::QARecord;
use crate::error::BackendError;

/// How the oracle compares a candidate against the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    /// Normalized equality with the solution or any checklist alias.
    Exact,
    /// Exact, or the normalized solution/alias appears inside the
    /// normalized candidate.
    Relaxed,
}

/// Case-fold and strip whitespace plus ASCII/CJK punctuation.
fn normalize(text: &str) -> String {
    const CJK_PUNCT: &str = "，。！？、；：“”‘’（）《》【】〈〉·…—～「」『』";
    text.to_lowercase()
        .chars()
        .filter(|c| !c.is_whitespace() && !c.is_ascii_punctuation() && !CJK_PUNCT.contains(*c))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct OracleJudge {
    matching: Matching,
}

impl OracleJudge {
    pub fn new(matching: Matching) -> Self {
        Self { matching }
    }

    pub fn exact() -> Self {
        Self::new(Matching::Exact)
    }

    pub fn relaxed() -> Self {
        Self::new(Matching::Relaxed)
    }

    fn matches(&self, record: &QARecord, candidate: &str) -> bool {
        let candidate = normalize(candidate);
        if candidate.is_empty() {
            return false;
        }
        let mut references = vec![normalize(&record.solution)];
        references.extend(record.checklist.iter().map(|alias| normalize(alias)));
        references.retain(|r| !r.is_empty());
        match self.matching {
            Matching::Exact => references.iter().any(|r| *r == candidate),
            Matching::Relaxed => references
                .iter()
                .any(|r| *r == candidate || candidate.contains(r.as_str())),
        }
    }
}

impl JudgeBackend for OracleJudge {
    fn verdict(&self, req: &JudgeRequest<'_>) -> Result<String, BackendError> {
        let correct = self.matches(req.record, req.candidate);
        Ok(match req.kind {
            JudgeKind::Loose => {
                let score = if correct { 10 } else { 1 };
                format!(
                    "第一步，分析：自动判定。\n第二步，json输出：\n{{\"打分理由\": \"自动判定\", \"得分\": {score}}}"
                )
            }
            JudgeKind::Strict { .. } => {
                let verdict = if correct { "正确" } else { "错误" };
                format!("第二步，评判结果：{{\"回复正确性\": \"{verdict}\"}}")
            }
            // The oracle only understands answer accuracy.
            JudgeKind::Behavior { .. } => "<count>0</count>".to_string(),
        })
    }
}
