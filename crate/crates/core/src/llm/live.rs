use std::sync::Arc;
use std::time::Instant;

use serde_json::{json, Value};

use super::{ChatBackend, ChatRequest, ChatResponse, LlmError, ModelConfig, TokenUsage};
use crate::http::{send_with_retry, HttpError, HttpRequest, HttpTransport, RetryPolicy};

pub const API_KEY_ENV: &str = "FANCRIC_LLM_KEY";

/// Chat-completions client over HTTP.
pub struct LiveBackend {
    transport: Arc<dyn HttpTransport>,
    config: ModelConfig,
    api_key: String,
    retry: RetryPolicy,
}

impl LiveBackend {
    pub fn new(transport: Arc<dyn HttpTransport>, config: ModelConfig, api_key: impl Into<String>) -> Self {
        let retry = RetryPolicy {
            max_retries: config.max_retries,
            ..RetryPolicy::default()
        };
        LiveBackend {
            transport,
            config,
            api_key: api_key.into(),
            retry,
        }
    }

    /// Reads the API key from `FANCRIC_LLM_KEY`.
    pub fn from_env(transport: Arc<dyn HttpTransport>, config: ModelConfig) -> Result<Self, LlmError> {
        let key = std::env::var(API_KEY_ENV)
            .map_err(|_| LlmError::Auth(format!("environment variable {API_KEY_ENV} is not set")))?;
        Ok(Self::new(transport, config, key))
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    fn body(&self, request: &ChatRequest) -> Result<String, LlmError> {
        let model = self
            .config
            .model(&request.model_tag)
            .ok_or_else(|| LlmError::InvalidRequest(format!("unknown model tag `{}`", request.model_tag)))?;
        let mut body = json!({
            "model": model,
            "messages": request.messages,
            "temperature": request.temperature,
        });
        if let Some(max) = request.max_tokens {
            body["max_tokens"] = json!(max);
        }
        Ok(body.to_string())
    }
}

fn parse_completion(body: &str) -> Result<(String, String, TokenUsage), LlmError> {
    let v: Value = serde_json::from_str(body).map_err(|e| LlmError::Protocol(e.to_string()))?;
    let choice = v["choices"]
        .get(0)
        .ok_or_else(|| LlmError::Protocol("no choices in response".into()))?;
    if choice["finish_reason"].as_str() == Some("length") {
        return Err(LlmError::Truncated);
    }
    let content = choice["message"]["content"]
        .as_str()
        .ok_or_else(|| LlmError::Protocol("choice has no message content".into()))?
        .to_string();
    let model = v["model"].as_str().unwrap_or_default().to_string();
    let usage = TokenUsage {
        prompt: v["usage"]["prompt_tokens"].as_u64().unwrap_or(0) as u32,
        completion: v["usage"]["completion_tokens"].as_u64().unwrap_or(0) as u32,
    };
    Ok((content, model, usage))
}

impl ChatBackend for LiveBackend {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        request.validate()?;
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let http = HttpRequest::post_json(url, self.body(request)?)
            .header("Authorization", format!("Bearer {}", self.api_key));
        let started = Instant::now();
        let resp = send_with_retry(self.transport.as_ref(), &http, &self.retry).map_err(|e| match e {
            HttpError::Status { status: 401 | 403, body } => LlmError::Auth(body),
            HttpError::Status { status, body } => LlmError::Protocol(format!("HTTP {status}: {body}")),
            HttpError::Exhausted { .. } => LlmError::Network(e.to_string()),
        })?;
        let latency_ms = started.elapsed().as_millis() as u64;
        let (content, model_used, token_usage) = parse_completion(&resp.body)?;
        Ok(ChatResponse {
            content,
            model_used,
            token_usage,
            latency_ms,
        })
    }
}
