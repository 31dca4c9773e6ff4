//! `/v1/chat/completions`-style HTTP client.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ChatProvider, ChatRequest, GatewayError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub auth_env: Option<String>,
    pub timeout_secs: f64,
    pub retries: u32,
    pub backoff_secs: f64,
    pub max_concurrent: usize,
    /// Also send `top_k: 1` for deterministic decoding. Not every server
    /// accepts the field.
    pub send_top_k: bool,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-3.5-turbo-16k".into(),
            auth_env: Some("OPENAI_API_KEY".into()),
            timeout_secs: 60.0,
            retries: 3,
            backoff_secs: 1.0,
            max_concurrent: 4,
            send_top_k: false,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if !(self.timeout_secs > 0.0) {
            return Err(GatewayError::Config("timeout_secs must be positive".into()));
        }
        if self.backoff_secs < 0.0 {
            return Err(GatewayError::Config(
                "backoff_secs must be non-negative".into(),
            ));
        }
        if self.max_concurrent == 0 {
            return Err(GatewayError::Config(
                "max_concurrent must be at least 1".into(),
            ));
        }
        if self.endpoint.is_empty() {
            return Err(GatewayError::Config("endpoint is empty".into()));
        }
        Ok(())
    }

    /// Reads the bearer token, failing before any request is made.
    pub fn resolve_token(&self) -> Result<Option<String>, GatewayError> {
        match &self.auth_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .ok()
                .filter(|v| !v.is_empty())
                .map(Some)
                .ok_or_else(|| {
                    GatewayError::Config(format!("environment variable {var} is not set"))
                }),
        }
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            retries: self.retries,
            backoff: Duration::from_secs_f64(self.backoff_secs),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub retries: u32,
    pub backoff: Duration,
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (0-based): `backoff * 2^attempt`.
    pub fn delay(&self, attempt: u32) -> Duration {
        self.backoff.saturating_mul(1u32 << attempt.min(16))
    }
}

/// Runs `op` until it succeeds, fails permanently, or retries run out.
pub fn with_retries<T>(
    policy: &RetryPolicy,
    sleep: &dyn Fn(Duration),
    mut op: impl FnMut() -> Result<T, GatewayError>,
) -> Result<T, GatewayError> {
    let mut attempt = 0;
    loop {
        match op() {
            Err(e) if e.is_transient() && attempt < policy.retries => {
                sleep(policy.delay(attempt));
                attempt += 1;
            }
            other => return other,
        }
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
pub struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

pub struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    pub fn new(permits: usize) -> Self {
        Self {
            permits: Mutex::new(permits),
            cv: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.permits.lock().unwrap();
        while *n == 0 {
            n = self.cv.wait(n).unwrap();
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportFailure {
    Timeout,
    Io(String),
}

/// Minimal JSON POST transport, swappable in tests.
pub trait HttpTransport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
        timeout: Duration,
    ) -> Result<HttpResponse, TransportFailure>;
}

/// POSTs `body` and maps status codes and transport failures onto
/// [`GatewayError`], retrying transient failures.
pub(crate) fn post_with_retries(
    transport: &dyn HttpTransport,
    cfg: &ProviderConfig,
    token: Option<&str>,
    body: &Value,
    sleep: &dyn Fn(Duration),
) -> Result<String, GatewayError> {
    let timeout = Duration::from_secs_f64(cfg.timeout_secs);
    with_retries(&cfg.retry_policy(), sleep, || {
        match transport.post_json(&cfg.endpoint, token, body, timeout) {
            Err(TransportFailure::Timeout) => Err(GatewayError::Timeout),
            Err(TransportFailure::Io(e)) => Err(GatewayError::Transport(e)),
            Ok(r) if r.status == 401 || r.status == 403 => Err(GatewayError::Auth(r.body)),
            Ok(r) if (200..300).contains(&r.status) => Ok(r.body),
            Ok(r) => Err(GatewayError::Status {
                status: r.status,
                body: r.body,
            }),
        }
    })
}

pub fn chat_request_body(cfg: &ProviderConfig, req: &ChatRequest) -> Value {
    let mut messages = vec![json!({"role": "system", "content": req.system})];
    messages.extend(
        req.messages
            .iter()
            .map(|m| json!({"role": m.role, "content": m.content})),
    );
    let mut body = json!({
        "model": cfg.model,
        "messages": messages,
        "max_tokens": req.decoding.max_output_tokens,
    });
    if req.decoding.deterministic {
        body["temperature"] = json!(0.0);
        if cfg.send_top_k {
            body["top_k"] = json!(1);
        }
    }
    body
}

/// Pulls `choices[0].message.content` out of a response body.
pub fn parse_chat_response(body: &str) -> Result<String, GatewayError> {
    let value: Value = serde_json::from_str(body)
        .map_err(|e| GatewayError::MalformedResponse(format!("invalid JSON: {e}")))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| GatewayError::MalformedResponse("missing choices[0].message.content".into()))
}

pub struct ChatCompletionsProvider<T> {
    cfg: ProviderConfig,
    token: Option<String>,
    transport: T,
    limiter: Semaphore,
    sleep: fn(Duration),
}

impl<T: HttpTransport> ChatCompletionsProvider<T> {
    /// Validates the config and resolves the auth token up front.
    pub fn new(cfg: ProviderConfig, transport: T) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let token = cfg.resolve_token()?;
        Ok(Self::with_token(cfg, token, transport))
    }

    pub fn with_token(cfg: ProviderConfig, token: Option<String>, transport: T) -> Self {
        let limiter = Semaphore::new(cfg.max_concurrent.max(1));
        Self {
            cfg,
            token,
            transport,
            limiter,
            sleep: std::thread::sleep,
        }
    }

    /// Replaces the sleep used between retries.
    pub fn with_sleep(mut self, sleep: fn(Duration)) -> Self {
        self.sleep = sleep;
        self
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.cfg
    }
}

impl<T: HttpTransport> ChatProvider for ChatCompletionsProvider<T> {
    fn complete(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        let _permit = self.limiter.acquire();
        let body = chat_request_body(&self.cfg, req);
        let text = post_with_retries(
            &self.transport,
            &self.cfg,
            self.token.as_deref(),
            &body,
            &self.sleep,
        )?;
        parse_chat_response(&text)
    }
}

#[cfg(feature = "http")]
#[derive(Debug, Clone, Default)]
pub struct UreqTransport;

#[cfg(feature = "http")]
impl HttpTransport for UreqTransport {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
        timeout: Duration,
    ) -> Result<HttpResponse, TransportFailure> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut request = agent.post(url).header("Content-Type", "application/json");
        if let Some(token) = bearer {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let payload = serde_json::to_vec(body).map_err(|e| TransportFailure::Io(e.to_string()))?;
        match request.send(&payload[..]) {
            Ok(mut response) => {
                let status = response.status().as_u16();
                let body = response
                    .body_mut()
                    .read_to_string()
                    .map_err(|e| TransportFailure::Io(e.to_string()))?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Timeout(_)) => Err(TransportFailure::Timeout),
            Err(e) => Err(TransportFailure::Io(e.to_string())),
        }
    }
}

#[cfg(feature = "http")]
impl ChatCompletionsProvider<UreqTransport> {
    pub fn from_config(cfg: ProviderConfig) -> Result<Self, GatewayError> {
        Self::new(cfg, UreqTransport)
    }
}
