//! OpenAI-compatible `chat/completions` transport.

use std::time::{Duration, Instant};

use base64::Engine;
use serde_json::{json, Value};

use super::{BackendConfig, GatewayError, ModelRequest, ModelResponse, Part, Usage};

pub(crate) enum SendError {
    /// Connection, timeout or unreadable body. Retryable.
    Transport(String),
    Status {
        status: u16,
        body: String,
        retry_after: Option<Duration>,
    },
    Fatal(GatewayError),
}

pub(crate) struct RemoteClient {
    url: String,
    token: Option<String>,
    http: reqwest::blocking::Client,
}

impl RemoteClient {
    pub(crate) fn new(config: &BackendConfig) -> Result<RemoteClient, GatewayError> {
        let endpoint = config.endpoint.as_deref().unwrap_or_default().trim_end_matches('/');
        let token = match &config.auth_env {
            Some(var) => Some(std::env::var(var).map_err(|_| GatewayError::MissingAuth(var.clone()))?),
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| GatewayError::InvalidConfig {
                id: config.id.clone(),
                reason: e.to_string(),
            })?;
        Ok(RemoteClient {
            url: format!("{endpoint}/chat/completions"),
            token,
            http,
        })
    }

    pub(crate) fn send(&self, request: &ModelRequest) -> Result<ModelResponse, SendError> {
        let started = Instant::now();
        let mut builder = self.http.post(&self.url).json(&request_body(request));
        if let Some(token) = &self.token {
            builder = builder.bearer_auth(token);
        }
        let response = builder.send().map_err(|e| SendError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let body = response.text().map_err(|e| SendError::Transport(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(SendError::Status {
                status,
                body,
                retry_after,
            });
        }
        let mut parsed = parse_body(&body).map_err(|reason| {
            SendError::Fatal(GatewayError::RequestRejected {
                status,
                body_excerpt: format!("{reason}: {}", super::excerpt(&body)),
            })
        })?;
        parsed.latency_ms = started.elapsed().as_millis() as u64;
        Ok(parsed)
    }
}

fn request_body(request: &ModelRequest) -> Value {
    let b64 = base64::engine::general_purpose::STANDARD;
    let messages: Vec<Value> = request
        .messages()
        .iter()
        .map(|m| {
            let content: Vec<Value> = m
                .parts
                .iter()
                .map(|p| match p {
                    Part::Text(t) => json!({"type": "text", "text": t}),
                    Part::Image(img) => json!({
                        "type": "image_url",
                        "image_url": {"url": format!("data:{};base64,{}", img.media_type(), b64.encode(img.bytes()))}
                    }),
                })
                .collect();
            json!({"role": m.role.as_str(), "content": content})
        })
        .collect();
    let params = request.params();
    json!({
        "model": request.model(),
        "messages": messages,
        "temperature": params.temperature,
        "max_tokens": params.max_tokens,
    })
}

fn parse_body(body: &str) -> Result<ModelResponse, String> {
    let v: Value = serde_json::from_str(body).map_err(|e| format!("response is not JSON ({e})"))?;
    let choice = v
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| "response has no choices".to_string())?;
    let text = match choice.pointer("/message/content") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Array(parts)) => parts
            .iter()
            .filter_map(|p| p.get("text").and_then(Value::as_str))
            .collect::<Vec<_>>()
            .join(""),
        _ => return Err("choice has no message content".to_string()),
    };
    let usage = Usage {
        prompt_tokens: v.pointer("/usage/prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        completion_tokens: v.pointer("/usage/completion_tokens").and_then(Value::as_u64).unwrap_or(0),
    };
    Ok(ModelResponse {
        text,
        finish_reason: choice
            .get("finish_reason")
            .and_then(Value::as_str)
            .unwrap_or("unknown")
            .to_string(),
        usage,
        latency_ms: 0,
        served_from_cache: false,
        attempts: 1,
    })
}
