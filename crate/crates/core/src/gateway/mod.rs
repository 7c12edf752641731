//! Uniform backend abstraction: remote chat-completions, scripted tables and
//! the oracle-echo describer, all behind a content-addressed response cache.

mod cache;
mod oracle;
mod ratelimit;
mod remote;
mod request;
mod retry;
mod scripted;

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{CacheRecord, ResponseCache};
pub use oracle::{Corruption, OracleOptions};
pub use ratelimit::RateLimiter;
pub use request::{
    DecodingParams, ImagePart, Message, MessageSummary, ModelRequest, Part, PartSummary, RequestSummary, Role,
};
pub use retry::RetryPolicy;
pub use scripted::{register_script, ScriptTable};

use remote::{RemoteClient, SendError};

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("backend unavailable after {attempts} attempts: {last_error}")]
    BackendUnavailable { attempts: u32, last_error: String },
    #[error("request rejected with HTTP {status}: {body_excerpt}")]
    RequestRejected { status: u16, body_excerpt: String },
    #[error("no scripted response for request {digest}")]
    ScriptMiss { digest: String },
    #[error("environment variable `{0}` holding the API key is not set")]
    MissingAuth(String),
    #[error("invalid backend config `{id}`: {reason}")]
    InvalidConfig { id: String, reason: String },
    #[error("oracle-echo backend cannot answer: {0}")]
    OracleInput(String),
    #[error("cache I/O: {0}")]
    Cache(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub text: String,
    pub finish_reason: String,
    pub usage: Usage,
    pub latency_ms: u64,
    pub served_from_cache: bool,
    /// Transport attempts spent on this response; 0 for cache hits.
    pub attempts: u32,
}

/// Anything that can answer a [`ModelRequest`].
pub trait ModelBackend: Send + Sync {
    fn id(&self) -> &str;
    /// Name placed in requests; part of the cache key.
    fn model_name(&self) -> &str;
    fn complete(&self, request: &ModelRequest) -> Result<ModelResponse, GatewayError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Remote,
    Scripted,
    OracleEcho,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub id: String,
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Name of the environment variable holding the bearer token.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests_per_minute: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<ScriptTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_file: Option<PathBuf>,
    #[serde(default)]
    pub oracle: OracleOptions,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    120
}

impl BackendConfig {
    fn bare(id: &str, kind: BackendKind) -> BackendConfig {
        BackendConfig {
            id: id.to_string(),
            kind,
            endpoint: None,
            model: None,
            auth_env: None,
            retry: RetryPolicy::default(),
            requests_per_minute: None,
            cache_dir: None,
            script: None,
            script_file: None,
            oracle: OracleOptions::default(),
            timeout_secs: default_timeout_secs(),
        }
    }

    pub fn remote(id: &str, endpoint: &str, model: &str, auth_env: Option<&str>) -> BackendConfig {
        BackendConfig {
            endpoint: Some(endpoint.to_string()),
            model: Some(model.to_string()),
            auth_env: auth_env.map(str::to_string),
            ..BackendConfig::bare(id, BackendKind::Remote)
        }
    }

    pub fn scripted(id: &str, table: ScriptTable) -> BackendConfig {
        BackendConfig {
            script: Some(table),
            ..BackendConfig::bare(id, BackendKind::Scripted)
        }
    }

    pub fn oracle_echo(id: &str, oracle: OracleOptions) -> BackendConfig {
        BackendConfig {
            oracle,
            ..BackendConfig::bare(id, BackendKind::OracleEcho)
        }
    }

    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> BackendConfig {
        self.cache_dir = Some(dir.into());
        self
    }

    /// Model name sent in requests: the configured model, else the id.
    pub fn model_name(&self) -> &str {
        self.model.as_deref().unwrap_or(&self.id)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        let invalid = |reason: &str| GatewayError::InvalidConfig {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.is_empty() {
            return Err(invalid("id must not be empty"));
        }
        match self.kind {
            BackendKind::Remote => {
                if self.endpoint.as_deref().unwrap_or("").is_empty() {
                    return Err(invalid("remote backends need an endpoint"));
                }
                if self.model.as_deref().unwrap_or("").is_empty() {
                    return Err(invalid("remote backends need a model name"));
                }
            }
            BackendKind::Scripted => {
                if self.script.is_none() && self.script_file.is_none() {
                    return Err(invalid("scripted backends need a script table"));
                }
            }
            BackendKind::OracleEcho => {
                if self.oracle.cell_px == 0 {
                    return Err(invalid("oracle cell_px must be at least 1"));
                }
                if let Some(c) = &self.oracle.corruption {
                    if !(0.0..=1.0).contains(&c.rate) {
                        return Err(invalid("corruption rate must lie in [0, 1]"));
                    }
                }
            }
        }
        if self.retry.max_attempts == 0 {
            return Err(invalid("retry.max_attempts must be at least 1"));
        }
        Ok(())
    }
}

enum Transport {
    Remote(RemoteClient),
    Scripted(ScriptTable),
    OracleEcho(OracleOptions),
}

/// A backend built from a [`BackendConfig`]: transport, cache, retry and
/// rate limiting. Safe to share between worker threads.
pub struct Backend {
    config: BackendConfig,
    transport: Transport,
    cache: ResponseCache,
    limiter: Option<RateLimiter>,
}

impl Backend {
    pub fn from_config(config: BackendConfig) -> Result<Backend, GatewayError> {
        config.validate()?;
        let transport = match config.kind {
            BackendKind::Remote => Transport::Remote(RemoteClient::new(&config)?),
            BackendKind::Scripted => {
                let mut table = match &config.script_file {
                    Some(path) => ScriptTable::load(path).map_err(|e| GatewayError::InvalidConfig {
                        id: config.id.clone(),
                        reason: format!("reading script {}: {e}", path.display()),
                    })?,
                    None => ScriptTable::default(),
                };
                if let Some(inline) = &config.script {
                    table.extend(inline);
                }
                Transport::Scripted(table)
            }
            BackendKind::OracleEcho => Transport::OracleEcho(config.oracle.clone()),
        };
        let cache = ResponseCache::new(config.cache_dir.clone())?;
        let limiter = config.requests_per_minute.map(RateLimiter::per_minute);
        Ok(Backend {
            config,
            transport,
            cache,
            limiter,
        })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    pub fn cache(&self) -> &ResponseCache {
        &self.cache
    }

    fn dispatch(&self, request: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        match &self.transport {
            Transport::Scripted(table) => {
                let text = table.get(request.digest()).ok_or_else(|| GatewayError::ScriptMiss {
                    digest: request.digest().to_string(),
                })?;
                Ok(local_response(text.to_string()))
            }
            Transport::OracleEcho(options) => Ok(local_response(oracle::answer(request, options)?)),
            Transport::Remote(client) => self.send_with_retry(client, request),
        }
    }

    fn send_with_retry(&self, client: &RemoteClient, request: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        let policy = &self.config.retry;
        let mut backoff = retry::Backoff::new(policy, request.digest());
        let mut attempt = 0;
        loop {
            attempt += 1;
            if let Some(limiter) = &self.limiter {
                limiter.acquire();
            }
            let err = match client.send(request) {
                Ok(mut response) => {
                    response.attempts = attempt;
                    return Ok(response);
                }
                Err(err) => err,
            };
            let (retryable, hint, message) = match err {
                SendError::Transport(msg) => (true, None, msg),
                SendError::Status {
                    status,
                    body,
                    retry_after,
                } => {
                    if status == 429 || status >= 500 {
                        (true, retry_after, format!("HTTP {status}: {}", excerpt(&body)))
                    } else {
                        return Err(GatewayError::RequestRejected {
                            status,
                            body_excerpt: excerpt(&body),
                        });
                    }
                }
                SendError::Fatal(err) => return Err(err),
            };
            if !retryable || attempt >= policy.max_attempts {
                return Err(GatewayError::BackendUnavailable {
                    attempts: attempt,
                    last_error: message,
                });
            }
            let delay = backoff.next_delay(hint);
            log::warn!(
                "backend {} attempt {attempt} failed ({message}); retrying in {delay:?}",
                self.config.id
            );
            std::thread::sleep(delay);
        }
    }
}

fn local_response(text: String) -> ModelResponse {
    ModelResponse {
        text,
        finish_reason: "stop".to_string(),
        usage: Usage::default(),
        latency_ms: 0,
        served_from_cache: false,
        attempts: 1,
    }
}

pub(crate) fn excerpt(body: &str) -> String {
    const LIMIT: usize = 300;
    if body.len() <= LIMIT {
        return body.to_string();
    }
    let mut end = LIMIT;
    while !body.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}...", &body[..end])
}

impl ModelBackend for Backend {
    fn id(&self) -> &str {
        &self.config.id
    }

    fn model_name(&self) -> &str {
        self.config.model_name()
    }

    /// Cache hit: stored response with `served_from_cache = true`. Miss:
    /// dispatch, store, return.
    fn complete(&self, request: &ModelRequest) -> Result<ModelResponse, GatewayError> {
        if let Some(hit) = self.cache.get(request.digest())? {
            return Ok(hit);
        }
        let started = Instant::now();
        let mut response = self.dispatch(request)?;
        if response.latency_ms == 0 {
            response.latency_ms = started.elapsed().as_millis() as u64;
        }
        self.cache.put(request, &response)?;
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(text: &str) -> ModelRequest {
        ModelRequest::new("scripted", vec![Message::user(vec![Part::Text(text.into())])], DecodingParams::default())
    }

    #[test]
    fn scripted_answers_by_digest() {
        let req = request("hello?");
        let mut table = ScriptTable::default();
        table.insert(req.digest(), "hello");
        let backend = Backend::from_config(register_script(table)).unwrap();
        assert_eq!(backend.complete(&req).unwrap().text, "hello");
        assert!(matches!(backend.complete(&request("other")), Err(GatewayError::ScriptMiss { .. })));
    }

    #[test]
    fn second_call_is_served_from_cache() {
        let req = request("q");
        let mut table = ScriptTable::default();
        table.insert(req.digest(), "a");
        let backend = Backend::from_config(register_script(table)).unwrap();
        let first = backend.complete(&req).unwrap();
        let second = backend.complete(&req).unwrap();
        assert!(!first.served_from_cache);
        assert!(second.served_from_cache);
        assert_eq!(first.text, second.text);
        assert_eq!(second.attempts, 0);
    }

    #[test]
    fn empty_script_always_misses() {
        let backend = Backend::from_config(register_script(ScriptTable::default())).unwrap();
        for q in ["a", "b", "c"] {
            assert!(matches!(backend.complete(&request(q)), Err(GatewayError::ScriptMiss { .. })));
        }
    }

    #[test]
    fn config_validation() {
        let mut remote = BackendConfig::remote("r", "http://x", "gpt", None);
        assert!(remote.validate().is_ok());
        remote.model = None;
        assert!(matches!(remote.validate(), Err(GatewayError::InvalidConfig { .. })));
        let mut scripted = BackendConfig::scripted("s", ScriptTable::default());
        scripted.script = None;
        assert!(scripted.validate().is_err());
        let mut oracle = BackendConfig::oracle_echo("o", OracleOptions::default());
        oracle.oracle.corruption = Some(Corruption { rate: 1.5, seed: 0 });
        assert!(oracle.validate().is_err());
    }

    #[test]
    fn excerpt_truncates_on_char_boundary() {
        let long = "é".repeat(400);
        let ex = excerpt(&long);
        assert!(ex.ends_with("..."));
        assert!(ex.len() <= 304);
    }
}
