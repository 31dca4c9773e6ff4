//! Error classes that decide the process exit code.

use std::fmt;

use topicseg::baselines::EmbeddingError;
use topicseg::gateway::GatewayError;
use topicseg::segmenter::SegmenterError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitClass {
    Other = 1,
    Config = 2,
    Provider = 3,
}

impl ExitClass {
    pub fn name(self) -> &'static str {
        match self {
            ExitClass::Other => "other",
            ExitClass::Config => "config",
            ExitClass::Provider => "provider",
        }
    }
}

/// Bad configuration or broken input contract; exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Hypothesis and reference document ids differ.
#[derive(Debug)]
pub struct IdMismatch {
    pub hyp: String,
    pub missing: Vec<String>,
    pub unexpected: Vec<String>,
}

impl fmt::Display for IdMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: document ids do not match any reference", self.hyp)?;
        if !self.missing.is_empty() {
            write!(f, "; missing: {}", self.missing.join(", "))?;
        }
        if !self.unexpected.is_empty() {
            write!(f, "; not in reference: {}", self.unexpected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for IdMismatch {}

/// Some documents failed; the worst class decides the exit code.
#[derive(Debug)]
pub struct DocumentFailures {
    pub failed: usize,
    pub total: usize,
    pub class: ExitClass,
}

impl fmt::Display for DocumentFailures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of {} documents failed (worst: {} error)",
            self.failed,
            self.total,
            self.class.name()
        )
    }
}

impl std::error::Error for DocumentFailures {}

fn gateway_class(e: &GatewayError) -> ExitClass {
    match e {
        GatewayError::Config(_) => ExitClass::Config,
        _ => ExitClass::Provider,
    }
}

fn classify_one(e: &(dyn std::error::Error + 'static)) -> Option<ExitClass> {
    if e.is::<ConfigError>() || e.is::<IdMismatch>() {
        return Some(ExitClass::Config);
    }
    if let Some(d) = e.downcast_ref::<DocumentFailures>() {
        return Some(d.class);
    }
    if let Some(g) = e.downcast_ref::<GatewayError>() {
        return Some(gateway_class(g));
    }
    if let Some(s) = e.downcast_ref::<SegmenterError>() {
        return match s {
            SegmenterError::Provider(g) => Some(gateway_class(g)),
            SegmenterError::InvalidConfig(_)
            | SegmenterError::Window(_)
            | SegmenterError::Examples(_) => Some(ExitClass::Config),
            _ => None,
        };
    }
    if let Some(EmbeddingError::ProviderFailure(_)) = e.downcast_ref::<EmbeddingError>() {
        return Some(ExitClass::Provider);
    }
    None
}

/// First recognised error in the chain, outermost first.
pub fn classify(err: &anyhow::Error) -> ExitClass {
    err.chain()
        .find_map(classify_one)
        .unwrap_or(ExitClass::Other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn classes() {
        assert_eq!(classify(&config_error("x")), ExitClass::Config);
        assert_eq!(classify(&anyhow::anyhow!("x")), ExitClass::Other);
        let e: anyhow::Error = SegmenterError::Provider(GatewayError::Timeout).into();
        assert_eq!(classify(&e), ExitClass::Provider);
        let e: anyhow::Error = GatewayError::Config("no key".into()).into();
        assert_eq!(classify(&e.context("building provider")), ExitClass::Config);
        let r: Result<(), _> = Err(EmbeddingError::ProviderFailure("down".into()));
        assert_eq!(
            classify(&r.context("embedding").unwrap_err()),
            ExitClass::Provider
        );
    }
}
