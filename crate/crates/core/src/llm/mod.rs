//! Chat-completion access behind one trait, with live, fixture, recording and scripted backends.

mod live;
mod mock;
mod structured;
mod throttle;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use live::{LiveBackend, API_KEY_ENV};
pub use mock::{CountingBackend, FixtureStore, MockBackend, RecordingBackend, ScriptedBackend};
pub use structured::{
    complete_structured, extract_payload, FieldKind, FieldSpec, PayloadDescriptor, StructuredOutcome,
};
pub use throttle::Throttled;

pub const WORKER: &str = "worker";
pub const REVIEWER: &str = "reviewer";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_tag: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl ChatRequest {
    pub fn new(model_tag: impl Into<String>, messages: Vec<ChatMessage>, temperature: f64) -> Self {
        ChatRequest {
            model_tag: model_tag.into(),
            messages,
            temperature,
            max_tokens: None,
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        let first = self
            .messages
            .first()
            .ok_or_else(|| LlmError::InvalidRequest("no messages".into()))?;
        if first.role == ChatRole::Assistant {
            return Err(LlmError::InvalidRequest(
                "first message must be system or user".into(),
            ));
        }
        if !(self.temperature >= 0.0) {
            return Err(LlmError::InvalidRequest("temperature must be >= 0".into()));
        }
        Ok(())
    }

    /// Stable key over the model tag and messages only.
    pub fn fingerprint(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            model_tag: &'a str,
            messages: &'a [ChatMessage],
        }
        let key = serde_json::to_vec(&Key {
            model_tag: &self.model_tag,
            messages: &self.messages,
        })
        .expect("serializable");
        hex::encode(Sha256::digest(&key))
    }

    /// Text of the last user message, used for fixture descriptions.
    pub fn last_user_text(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == ChatRole::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt: u32,
    pub completion: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub model_used: String,
    pub token_usage: TokenUsage,
    pub latency_ms: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("invalid chat request: {0}")]
    InvalidRequest(String),
    #[error("no fixture for fingerprint {fingerprint} (last user message: {preview:?})")]
    MissingFixture { fingerprint: String, preview: String },
    #[error("network failure: {0}")]
    Network(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("response truncated at the token limit")]
    Truncated,
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("fixture store: {0}")]
    Fixture(String),
    #[error("no usable payload after {attempts} attempts: {last_error}")]
    MalformedAfterRetries {
        attempts: u32,
        last_error: String,
        responses: Vec<String>,
    },
}

pub trait ChatBackend: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError>;
}

impl<B: ChatBackend + ?Sized> ChatBackend for &B {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).send(request)
    }
}

impl<B: ChatBackend + ?Sized> ChatBackend for Box<B> {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).send(request)
    }
}

impl<B: ChatBackend + ?Sized> ChatBackend for std::sync::Arc<B> {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).send(request)
    }
}

/// Validates the request, then sends it.
pub fn send_chat(request: &ChatRequest, backend: &dyn ChatBackend) -> Result<ChatResponse, LlmError> {
    request.validate()?;
    backend.send(request)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSlot {
    pub model: String,
    pub temperature: f64,
}

/// Maps logical model tags to concrete models and sampling settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub base_url: String,
    pub slots: BTreeMap<String, ModelSlot>,
    pub max_concurrency: usize,
    pub max_retries: u32,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let mut slots = BTreeMap::new();
        slots.insert(
            WORKER.to_string(),
            ModelSlot {
                model: "gpt-4o-mini".into(),
                temperature: 1.0,
            },
        );
        slots.insert(
            REVIEWER.to_string(),
            ModelSlot {
                model: "gpt-4o".into(),
                temperature: 0.2,
            },
        );
        ModelConfig {
            base_url: "https://api.openai.com/v1".into(),
            slots,
            max_concurrency: 4,
            max_retries: 3,
        }
    }
}

impl ModelConfig {
    pub fn temperature(&self, tag: &str) -> f64 {
        self.slots.get(tag).map(|s| s.temperature).unwrap_or(1.0)
    }

    pub fn model(&self, tag: &str) -> Option<&str> {
        self.slots.get(tag).map(|s| s.model.as_str())
    }

    /// A request for `tag` using the slot's temperature.
    pub fn request(&self, tag: &str, messages: Vec<ChatMessage>) -> ChatRequest {
        ChatRequest::new(tag, messages, self.temperature(tag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(text: &str) -> ChatRequest {
        ChatRequest::new(WORKER, vec![ChatMessage::system("s"), ChatMessage::user(text)], 1.0)
    }

    #[test]
    fn fingerprint_ignores_temperature() {
        let a = req("hi");
        let mut b = a.clone();
        b.temperature = 0.0;
        b.max_tokens = Some(5);
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), req("hi!").fingerprint());
        let mut c = a.clone();
        c.model_tag = REVIEWER.into();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn request_validation() {
        assert!(req("x").validate().is_ok());
        let empty = ChatRequest::new(WORKER, vec![], 1.0);
        assert!(empty.validate().is_err());
        let bad = ChatRequest::new(WORKER, vec![ChatMessage::assistant("x")], 1.0);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn default_slots() {
        let c = ModelConfig::default();
        assert_eq!(c.model(WORKER), Some("gpt-4o-mini"));
        assert_eq!(c.model(REVIEWER), Some("gpt-4o"));
        assert_eq!(c.temperature(WORKER), 1.0);
        assert_eq!(c.temperature(REVIEWER), 0.2);
    }
}
