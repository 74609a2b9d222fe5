//! Model-turn parsing: a reasoning block wrapped in thinking tags,
//! followed by either a `web_search|{...}` tool call or the final
//! answer text.

use super::{Action, AgentConfig};
use crate::error::ParseError;

const OPEN_TAG: &str = "<thinking>";
const CLOSE_TAG: &str = "</thinking>";
const TOOL_NAME: &str = "web_search";

/// A successfully parsed model turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedTurn {
    pub reasoning: String,
    pub action: Action,
    /// True when the tool call carried more queries than allowed and
    /// was truncated to the limit.
    pub query_overflow: bool,
}

/// Splits a raw model turn into (reasoning, action).
///
/// The trailing segment is a search action when it contains a
/// `web_search|{'search_queries': [...]}` tool call; a present but
/// malformed tool call is a parse failure rather than an answer.
/// Over-long query lists are truncated to `max_queries_per_round`
/// with the overflow flagged, not failed.
pub fn parse_turn(raw: &str, config: &AgentConfig) -> Result<ParsedTurn, ParseError> {
    let open = raw.find(OPEN_TAG).ok_or(ParseError::MissingThinkingTags)?;
    let after_open = open + OPEN_TAG.len();
    let close_rel = raw[after_open..]
        .find(CLOSE_TAG)
        .ok_or(ParseError::MissingThinkingTags)?;
    let reasoning = raw[after_open..after_open + close_rel].to_string();
    let trailing = raw[after_open + close_rel + CLOSE_TAG.len()..].trim();
    if trailing.is_empty() {
        return Err(ParseError::EmptyFinalSegment);
    }

    match find_tool_call(trailing) {
        Some(call_body) => {
            let queries = parse_query_list(call_body)?;
            let query_overflow = queries.len() > config.max_queries_per_round;
            let queries: Vec<String> = queries
                .into_iter()
                .take(config.max_queries_per_round)
                .collect();
            Ok(ParsedTurn {
                reasoning,
                action: Action::Search { queries },
                query_overflow,
            })
        }
        None => Ok(ParsedTurn {
            reasoning,
            action: Action::Answer {
                text: trailing.to_string(),
            },
            query_overflow: false,
        }),
    }
}

/// Finds a `web_search|` tool call anywhere in the segment and returns
/// the text starting at its `{`. Mentions of the tool name without the
/// pipe separator are not tool calls.
fn find_tool_call(segment: &str) -> Option<&str> {
    let mut search_from = 0;
    while let Some(pos) = segment[search_from..].find(TOOL_NAME) {
        let abs = search_from + pos;
        let rest = segment[abs + TOOL_NAME.len()..].trim_start();
        if let Some(stripped) = rest.strip_prefix('|') {
            return Some(stripped.trim_start());
        }
        search_from = abs + TOOL_NAME.len();
    }
    None
}

/// Parses `{'search_queries': ['q1', 'q2', ...]}`. Both single and
/// double quotes are accepted, with backslash escapes inside strings.
fn parse_query_list(body: &str) -> Result<Vec<String>, ParseError> {
    let malformed = |msg: &str| ParseError::MalformedToolCall(msg.to_string());
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;

    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    let read_string = |i: &mut usize| -> Result<String, ParseError> {
        let quote = chars[*i];
        *i += 1;
        let mut out = String::new();
        while *i < chars.len() {
            let c = chars[*i];
            if c == '\\' && *i + 1 < chars.len() {
                out.push(chars[*i + 1]);
                *i += 2;
                continue;
            }
            if c == quote {
                *i += 1;
                return Ok(out);
            }
            out.push(c);
            *i += 1;
        }
        Err(ParseError::MalformedToolCall(
            "unterminated string in query list".into(),
        ))
    };

    skip_ws(&mut i);
    if i >= chars.len() || chars[i] != '{' {
        return Err(malformed("expected `{` after web_search|"));
    }
    i += 1;
    skip_ws(&mut i);
    if i >= chars.len() || (chars[i] != '\'' && chars[i] != '"') {
        return Err(malformed("expected quoted search_queries key"));
    }
    let key = read_string(&mut i)?;
    if key != "search_queries" {
        return Err(malformed(&format!("unknown key `{key}`")));
    }
    skip_ws(&mut i);
    if i >= chars.len() || chars[i] != ':' {
        return Err(malformed("expected `:` after search_queries"));
    }
    i += 1;
    skip_ws(&mut i);
    if i >= chars.len() || chars[i] != '[' {
        return Err(malformed("expected `[` opening the query list"));
    }
    i += 1;

    let mut queries = Vec::new();
    loop {
        skip_ws(&mut i);
        if i >= chars.len() {
            return Err(malformed("unterminated query list"));
        }
        match chars[i] {
            ']' => {
                i += 1;
                break;
            }
            ',' => {
                i += 1;
            }
            '\'' | '"' => {
                let q = read_string(&mut i)?;
                let q = q.trim();
                if !q.is_empty() {
                    queries.push(q.to_string());
                }
            }
            other => {
                return Err(malformed(&format!("unexpected `{other}` in query list")));
            }
        }
    }
    skip_ws(&mut i);
    if i >= chars.len() || chars[i] != '}' {
        return Err(malformed("expected `}` closing the tool call"));
    }

    if queries.is_empty() {
        return Err(ParseError::EmptyQueryList);
    }
    Ok(queries)
}

/// Renders an action back into the canonical turn format. Inverse of
/// [`parse_turn`] for well-formed content.
pub fn serialize_action(reasoning: &str, action: &Action) -> String {
    match action {
        Action::Search { queries } => {
            let list = queries
                .iter()
                .map(|q| format!("'{q}'"))
                .collect::<Vec<_>>()
                .join(", ");
            format!("{OPEN_TAG}{reasoning}{CLOSE_TAG}web_search|{{'search_queries': [{list}]}}")
        }
        Action::Answer { text } => format!("{OPEN_TAG}{reasoning}{CLOSE_TAG}{text}"),
    }
}
