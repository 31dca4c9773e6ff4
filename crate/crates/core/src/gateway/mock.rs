use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChatProvider, ChatRequest, GatewayError};

/// One scripted reply. `match` is a substring of the last user message, or
/// `"*"` for any request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    #[serde(rename = "match")]
    pub pattern: String,
    pub reply: String,
}

impl MockRule {
    pub fn new(pattern: impl Into<String>, reply: impl Into<String>) -> Self {
        Self {
            pattern: pattern.into(),
            reply: reply.into(),
        }
    }

    fn matches(&self, content: &str) -> bool {
        self.pattern == "*" || content.contains(&self.pattern)
    }
}

/// Deterministic provider driven by an ordered rule list; the first
/// matching rule answers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MockProvider {
    rules: Vec<MockRule>,
}

impl MockProvider {
    pub fn new(rules: Vec<MockRule>) -> Self {
        Self { rules }
    }

    /// Always answers with `reply`.
    pub fn constant(reply: impl Into<String>) -> Self {
        Self::new(vec![MockRule::new("*", reply)])
    }

    pub fn from_json(json: &str) -> Result<Self, GatewayError> {
        serde_json::from_str(json)
            .map(Self::new)
            .map_err(|e| GatewayError::Config(format!("mock script: {e}")))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&json)
    }

    pub fn rules(&self) -> &[MockRule] {
        &self.rules
    }
}

impl ChatProvider for MockProvider {
    fn complete(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        let content = req.last_user_content();
        self.rules
            .iter()
            .find(|r| r.matches(content))
            .map(|r| r.reply.clone())
            .ok_or(GatewayError::Unscripted)
    }
}

/// Provider backed by a closure, for rule-based test doubles.
pub struct FnProvider<F>(pub F);

impl<F> ChatProvider for FnProvider<F>
where
    F: Fn(&ChatRequest) -> Result<String, GatewayError> + Send + Sync,
{
    fn complete(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        (self.0)(req)
    }
}
