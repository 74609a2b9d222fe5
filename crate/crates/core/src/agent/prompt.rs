//! Prompt rendering: the agent system prompt and the per-round
//! retrieved-documents turn. All rendering is deterministic; identical
//! inputs give byte-identical output.

use super::{History, Provenance, TokenSpan};
use crate::search::Document;

/// System prompt driving the search-and-reason loop, with a `$query`
/// slot for the question.
pub const AGENT_PROMPT_TEMPLATE: &str = include_str!("../../templates/agent_prompt.txt");

/// Extra instruction appended to the system prompt when retrieval is
/// disabled (isolation testing).
const NO_SEARCH_NOTE: &str =
    "## 特别说明：\n当前搜索工具不可用，你必须直接基于已有知识在本轮给出最终回答，不要输出任何工具调用。\n\n";

/// User message injected after a model emits a tool call while
/// retrieval is disabled.
pub const FORCED_ANSWER_RETRY: &str =
    "搜索工具当前不可用，请直接基于已有信息给出最终回答，不要输出工具调用。";

const DOCS_HEADER: &str = "以下是检索到的网页结果：\n";

/// Fills `$name` slots in a template. Slot values are inserted as-is
/// and never re-scanned, so `$`-like text inside values cannot expand.
pub fn render_template(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let bytes = template.as_bytes();
    let mut i = 0;
    'outer: while i < bytes.len() {
        if bytes[i] == b'$' {
            for (name, value) in slots {
                let end = i + 1 + name.len();
                if end <= bytes.len() && &template[i + 1..end] == *name {
                    out.push_str(value);
                    i = end;
                    continue 'outer;
                }
            }
        }
        let ch_len = template[i..].chars().next().map(char::len_utf8).unwrap_or(1);
        out.push_str(&template[i..i + ch_len]);
        i += ch_len;
    }
    out
}

/// First-turn prompt with the question substituted.
pub fn render_agent_prompt(question: &str) -> String {
    render_template(AGENT_PROMPT_TEMPLATE, &[("query", question)])
}

/// First-turn prompt for search-disabled episodes.
pub fn render_agent_prompt_no_search(question: &str) -> String {
    let marker = "[问题开始]";
    let base = render_agent_prompt(question);
    match base.find(marker) {
        Some(pos) => format!("{}{}{}", &base[..pos], NO_SEARCH_NOTE, &base[pos..]),
        None => format!("{NO_SEARCH_NOTE}{base}"),
    }
}

/// Renders retrieved documents as the next user turn, split into
/// provenance spans: the header is prompt scaffolding, each numbered
/// document block is retrieved content.
pub fn render_documents_turn(documents: &[Document]) -> Vec<TokenSpan> {
    let mut spans = vec![TokenSpan::new(DOCS_HEADER, Provenance::Prompt)];
    for (i, doc) in documents.iter().enumerate() {
        let block = format!(
            "[{}] 标题：{}\n来源：{}\n内容：{}\n\n",
            i + 1,
            doc.title,
            doc.url,
            doc.content
        );
        spans.push(TokenSpan::new(block, Provenance::Retrieved));
    }
    spans
}

/// Deterministic prompt for the next model call: the system prompt on
/// the first turn, the rendered documents afterwards.
pub fn render_next_prompt(history: &History, new_documents: &[Document]) -> String {
    if history.rounds.is_empty() {
        render_agent_prompt(&history.question)
    } else {
        render_documents_turn(new_documents)
            .iter()
            .map(|s| s.text.as_str())
            .collect()
    }
}
