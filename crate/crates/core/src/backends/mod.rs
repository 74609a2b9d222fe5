//! Pluggable model and judge backends: an HTTP chat-completion client
//! for hosted models and deterministic scripted backends for tests.

mod http;
mod scripted;

pub use http::{HttpChatBackend, HttpChatConfig};
pub use scripted::{ScriptedBackend, ScriptedJudge, ScriptedTurn};

use crate::dataset::QARecord;
use crate::error::BackendError;

/// Chat message role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

/// One chat message.
#[derive(Debug, Clone)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

/// Identifies which episode turn a completion request belongs to, so
/// scripted backends can replay deterministically. HTTP backends
/// ignore it.
#[derive(Debug, Clone, Copy)]
pub struct TurnCtx<'a> {
    pub record_id: &'a str,
    /// 1-based attempt index for repeated runs of the same record.
    pub attempt: usize,
    /// 1-based round index within the episode.
    pub round: usize,
}

impl<'a> TurnCtx<'a> {
    pub fn new(record_id: &'a str, attempt: usize, round: usize) -> Self {
        Self {
            record_id,
            attempt,
            round,
        }
    }
}

/// A policy model: given the running chat, produce one full model turn.
///
/// Implementations must be callable from many worker threads at once.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, ctx: &TurnCtx<'_>, messages: &[ChatMessage]) -> Result<String, BackendError>;
}

impl<B: ChatBackend + ?Sized> ChatBackend for &B {
    fn complete(&self, ctx: &TurnCtx<'_>, messages: &[ChatMessage]) -> Result<String, BackendError> {
        (**self).complete(ctx, messages)
    }
}

/// Sends a single-prompt judge request through a chat backend and
/// returns the raw verdict text. Kept separate from episode completion
/// so judge traffic can be routed and rate-limited independently.
pub fn judge(prompt: &str, backend: &dyn ChatBackend) -> Result<String, BackendError> {
    let ctx = TurnCtx::new("judge", 1, 1);
    backend.complete(&ctx, &[ChatMessage::new(Role::User, prompt)])
}

/// What a judge call is asking for; lets non-LLM judges answer without
/// parsing the rendered prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JudgeKind {
    /// Single 1-10 scoring call.
    Loose,
    /// One of the three boolean verdict rounds (1-based).
    Strict { round: u8 },
    /// Count occurrences of a named reasoning behavior.
    Behavior { name: &'static str },
}

impl JudgeKind {
    /// Stable tag used to key scripted judge responses.
    pub fn tag(&self) -> String {
        match self {
            JudgeKind::Loose => "loose".into(),
            JudgeKind::Strict { round } => format!("strict{round}"),
            JudgeKind::Behavior { name } => format!("behavior:{name}"),
        }
    }
}

/// A fully rendered judge request plus the structured fields it was
/// rendered from.
#[derive(Debug)]
pub struct JudgeRequest<'a> {
    pub prompt: String,
    pub kind: JudgeKind,
    pub record: &'a QARecord,
    /// The answer text being graded, or the reasoning chain for
    /// behavior counting.
    pub candidate: &'a str,
}

/// A grading backend. LLM-backed judges send `prompt` to a chat
/// endpoint; deterministic judges compute the verdict from the
/// structured fields and emit it in the same wire format.
pub trait JudgeBackend: Send + Sync {
    fn verdict(&self, req: &JudgeRequest<'_>) -> Result<String, BackendError>;
}

impl<B: JudgeBackend + ?Sized> JudgeBackend for &B {
    fn verdict(&self, req: &JudgeRequest<'_>) -> Result<String, BackendError> {
        (**self).verdict(req)
    }
}

/// Routes judge requests through any chat backend.
pub struct ChatJudge<B: ChatBackend> {
    backend: B,
}

impl<B: ChatBackend> ChatJudge<B> {
    pub fn new(backend: B) -> Self {
        Self { backend }
    }
}

impl<B: ChatBackend> JudgeBackend for ChatJudge<B> {
    fn verdict(&self, req: &JudgeRequest<'_>) -> Result<String, BackendError> {
        judge(&req.prompt, &self.backend)
    }
}
