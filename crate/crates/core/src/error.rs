//! Crate-wide error types.

use thiserror::Error;

/// Turn parsing failures. Any of these terminates an episode with
/// `TerminatedBy::ParseFailure` when raised inside the agent loop.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("missing or unbalanced thinking tags")]
    MissingThinkingTags,
    #[error("empty segment after the reasoning block")]
    EmptyFinalSegment,
    #[error("malformed web_search tool call: {0}")]
    MalformedToolCall(String),
    #[error("web_search tool call carries an empty query list")]
    EmptyQueryList,
}

/// Model/judge backend failures.
#[derive(Debug, Error)]
pub enum BackendError {
    #[error("request timed out")]
    Timeout,
    #[error("http status {0}")]
    HttpStatus(u16),
    #[error("scripted backend exhausted: no turn for record {record} attempt {attempt} round {round}")]
    ExhaustedScript {
        record: String,
        attempt: usize,
        round: usize,
    },
    #[error("failed to decode backend response: {0}")]
    Decode(String),
    #[error("transport error: {0}")]
    Transport(String),
}

/// Search backend failures. Empty result lists are not errors; only
/// transport-level problems surface here.
#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search request timed out")]
    Timeout,
    #[error("search http status {0}")]
    HttpStatus(u16),
    #[error("failed to decode search response: {0}")]
    Decode(String),
    #[error("search transport error: {0}")]
    Transport(String),
}

/// Grading failures.
#[derive(Debug, Error)]
pub enum GradeError {
    #[error("judge verdict missing expected field: {0}")]
    VerdictParse(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Loss/gradient computation failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrpoError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Raised when a tokenization cannot be aligned to provenance span
/// boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProvenanceError {
    #[error("tokens do not reconstruct span {span_index} exactly; token boundaries straddle the provenance boundary")]
    SpanAlignment { span_index: usize },
}

/// Dataset/record file problems.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad record on line {line}: {message}")]
    BadRecord { line: usize, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
}

/// Configuration problems, reported with the offending field path.
#[derive(Debug, Error)]
#[error("config error at `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Umbrella error for pipeline entry points and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Grade(#[from] GradeError),
    #[error(transparent)]
    Grpo(#[from] GrpoError),
    #[error(transparent)]
    Provenance(#[from] ProvenanceError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
