//! Chat-completion providers and parsing of index-list replies.

pub(crate) mod chat;
mod mock;
mod parse;

#[cfg(feature = "http")]
pub use chat::UreqTransport;
pub use chat::{
    chat_request_body, parse_chat_response, with_retries, ChatCompletionsProvider, HttpResponse,
    HttpTransport, ProviderConfig, RetryPolicy, Semaphore, TransportFailure,
};
pub use mock::{FnProvider, MockProvider, MockRule};
pub use parse::{
    detect_runaway, extract_integers, parse_index_list, parse_index_list_with, parse_single_index,
    render_index_list, IndexListResult, ParseError, RunawayConfig, SingleIndex,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("authentication rejected: {0}")]
    Auth(String),
    #[error("request timed out")]
    Timeout,
    #[error("unexpected HTTP status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("provider configuration: {0}")]
    Config(String),
    #[error("no mock rule matches the request")]
    Unscripted,
}

impl GatewayError {
    /// Whether another attempt may succeed.
    pub fn is_transient(&self) -> bool {
        match self {
            GatewayError::Transport(_) | GatewayError::Timeout => true,
            GatewayError::Status { status, .. } => {
                *status == 408 || *status == 429 || *status >= 500
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: Role::User,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoding {
    /// Greedy / top-1 decoding.
    pub deterministic: bool,
    pub max_output_tokens: usize,
}

impl Default for Decoding {
    fn default() -> Self {
        Self {
            deterministic: true,
            max_output_tokens: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system: String,
    pub messages: Vec<ChatMessage>,
    pub decoding: Decoding,
}

impl ChatRequest {
    pub fn last_user_content(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map_or("", |m| m.content.as_str())
    }
}

/// Anything that turns a chat request into assistant text.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<String, GatewayError>;
}

impl<P: ChatProvider + ?Sized> ChatProvider for &P {
    fn complete(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        (**self).complete(req)
    }
}

impl<P: ChatProvider + ?Sized> ChatProvider for Box<P> {
    fn complete(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        (**self).complete(req)
    }
}

/// Sends one request through a provider.
pub fn complete(provider: &dyn ChatProvider, req: &ChatRequest) -> Result<String, GatewayError> {
    provider.complete(req)
}
