//! Machine-readable replies: pull a JSON object out of free text, check it, re-prompt on failure.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ChatBackend, ChatMessage, ChatRequest, ChatResponse, LlmError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldKind {
    Text,
    Integer { min: Option<i64>, max: Option<i64> },
    Number,
    Bool,
    /// Array with at least `min_len` elements.
    Array { min_len: usize },
    Object,
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub kind: FieldKind,
    pub required: bool,
}

/// Shape of the JSON object an agent must reply with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayloadDescriptor {
    pub name: String,
    pub fields: Vec<FieldSpec>,
}

impl PayloadDescriptor {
    pub fn new(name: impl Into<String>) -> Self {
        PayloadDescriptor {
            name: name.into(),
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, name: &str, kind: FieldKind) -> Self {
        self.fields.push(FieldSpec {
            name: name.into(),
            kind,
            required: true,
        });
        self
    }

    pub fn optional(mut self, name: &str, kind: FieldKind) -> Self {
        self.fields.push(FieldSpec {
            name: name.into(),
            kind,
            required: false,
        });
        self
    }

    pub fn describe(&self) -> String {
        self.fields
            .iter()
            .map(|f| {
                let kind = match &f.kind {
                    FieldKind::Text => "string".to_string(),
                    FieldKind::Integer { min: Some(a), max: Some(b) } => format!("integer {a}-{b}"),
                    FieldKind::Integer { .. } => "integer".to_string(),
                    FieldKind::Number => "number".to_string(),
                    FieldKind::Bool => "boolean".to_string(),
                    FieldKind::Array { min_len: 0 } => "array".to_string(),
                    FieldKind::Array { min_len } => format!("array of at least {min_len}"),
                    FieldKind::Object => "object".to_string(),
                    FieldKind::Any => "any".to_string(),
                };
                let opt = if f.required { "" } else { ", optional" };
                format!("\"{}\" ({kind}{opt})", f.name)
            })
            .collect::<Vec<_>>()
            .join(", ")
    }

    pub fn validate(&self, value: &Value) -> Result<(), String> {
        let obj = value
            .as_object()
            .ok_or_else(|| "the payload must be a JSON object".to_string())?;
        for f in &self.fields {
            let Some(v) = obj.get(&f.name).filter(|v| !v.is_null()) else {
                if f.required {
                    return Err(format!("missing field `{}`", f.name));
                }
                continue;
            };
            let ok = match &f.kind {
                FieldKind::Text => v.is_string(),
                FieldKind::Integer { min, max } => match v.as_i64() {
                    Some(i) => {
                        if min.is_some_and(|m| i < m) || max.is_some_and(|m| i > m) {
                            return Err(format!(
                                "field `{}` = {i} is outside [{}, {}]",
                                f.name,
                                min.map(|m| m.to_string()).unwrap_or_default(),
                                max.map(|m| m.to_string()).unwrap_or_default()
                            ));
                        }
                        true
                    }
                    None => false,
                },
                FieldKind::Number => v.is_number(),
                FieldKind::Bool => v.is_boolean(),
                FieldKind::Array { min_len } => match v.as_array() {
                    Some(a) if a.len() < *min_len => {
                        return Err(format!(
                            "field `{}` needs at least {min_len} elements, got {}",
                            f.name,
                            a.len()
                        ))
                    }
                    Some(_) => true,
                    None => false,
                },
                FieldKind::Object => v.is_object(),
                FieldKind::Any => true,
            };
            if !ok {
                return Err(format!("field `{}` has the wrong type", f.name));
            }
        }
        Ok(())
    }
}

fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("```") {
        let after = &rest[start + 3..];
        let body_start = after.find('\n').map(|i| i + 1).unwrap_or(after.len());
        let body = &after[body_start..];
        match body.find("```") {
            Some(end) => {
                out.push(&body[..end]);
                rest = &body[end + 3..];
            }
            None => break,
        }
    }
    out
}

/// Byte length of the balanced `{...}` starting at `s[0]`, honouring JSON strings.
fn balanced_len(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_str {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '{' => depth += 1,
            '}' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// First JSON object in the text: fenced blocks first, then bare braces.
pub fn extract_payload(text: &str) -> Result<Value, String> {
    for block in fenced_blocks(text) {
        if let Ok(v) = serde_json::from_str::<Value>(block.trim()) {
            if v.is_object() {
                return Ok(v);
            }
        }
    }
    let mut offset = 0;
    while let Some(i) = text[offset..].find('{') {
        let start = offset + i;
        if let Some(len) = balanced_len(&text[start..]) {
            if let Ok(v) = serde_json::from_str::<Value>(&text[start..start + len]) {
                return Ok(v);
            }
        }
        offset = start + 1;
    }
    Err("no JSON object found in the reply".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredOutcome {
    pub value: Value,
    pub attempts: u32,
    /// Every request/response pair, in order.
    pub exchanges: Vec<(ChatRequest, ChatResponse)>,
}

/// Sends `request` until the reply carries a payload matching `descriptor`.
///
/// Each failed attempt appends the bad reply and the validation error to the
/// conversation before asking again. Backend errors are returned immediately.
pub fn complete_structured(
    backend: &dyn ChatBackend,
    request: &ChatRequest,
    descriptor: &PayloadDescriptor,
    max_attempts: u32,
) -> Result<StructuredOutcome, LlmError> {
    if max_attempts == 0 {
        return Err(LlmError::InvalidRequest("max_attempts must be at least 1".into()));
    }
    request.validate()?;
    let mut current = request.clone();
    let mut exchanges = Vec::new();
    let mut last_error = String::new();
    for attempt in 1..=max_attempts {
        let resp = backend.send(&current)?;
        exchanges.push((current.clone(), resp.clone()));
        match extract_payload(&resp.content).and_then(|v| descriptor.validate(&v).map(|()| v)) {
            Ok(value) => {
                return Ok(StructuredOutcome {
                    value,
                    attempts: attempt,
                    exchanges,
                })
            }
            Err(e) => {
                last_error = e;
                current.messages.push(ChatMessage::assistant(resp.content));
                current.messages.push(ChatMessage::user(format!(
                    "Your previous reply could not be used: {last_error}. Reply with a single JSON object with the fields {}.",
                    descriptor.describe()
                )));
            }
        }
    }
    Err(LlmError::MalformedAfterRetries {
        attempts: max_attempts,
        last_error,
        responses: exchanges.into_iter().map(|(_, r)| r.content).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{ScriptedBackend, WORKER};

    fn rating() -> PayloadDescriptor {
        PayloadDescriptor::new("rating")
            .field("player_id", FieldKind::Text)
            .field("rating", FieldKind::Integer { min: Some(1), max: Some(10) })
    }

    fn req() -> ChatRequest {
        ChatRequest::new(WORKER, vec![ChatMessage::user("rate")], 1.0)
    }

    #[test]
    fn exact_fields() {
        let b = ScriptedBackend::replies([r#"{"player_id": "p1", "rating": 7}"#]);
        let out = complete_structured(&b, &req(), &rating(), 3).unwrap();
        assert_eq!(out.attempts, 1);
        assert_eq!(out.value["rating"], 7);
    }

    #[test]
    fn prose_around_fence() {
        let text = "Sure! Here you go:\n```json\n{\"player_id\": \"p1\", \"rating\": 8}\n```\nHope that helps {not json}.";
        assert_eq!(extract_payload(text).unwrap()["rating"], 8);
    }

    #[test]
    fn bare_object_with_braces_in_strings() {
        let text = r#"Answer: {"player_id": "a}b", "rating": 3} trailing"#;
        assert_eq!(extract_payload(text).unwrap()["player_id"], "a}b");
    }

    #[test]
    fn fail_once_then_succeed() {
        let b = ScriptedBackend::replies(["no idea", r#"{"player_id": "p1", "rating": 5}"#]);
        let out = complete_structured(&b, &req(), &rating(), 3).unwrap();
        assert_eq!(out.attempts, 2);
        let second = &b.requests()[1];
        assert_eq!(second.messages.len(), 3);
        assert!(second.messages[2].content.contains("no JSON object"));
    }

    #[test]
    fn exhausts_attempts() {
        let b = ScriptedBackend::replies([r#"{"player_id": "p1", "rating": 11}"#; 5]);
        let err = complete_structured(&b, &req(), &rating(), 3).unwrap_err();
        match err {
            LlmError::MalformedAfterRetries { attempts, responses, last_error } => {
                assert_eq!(attempts, 3);
                assert_eq!(responses.len(), 3);
                assert!(last_error.contains("outside"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(b.requests().len(), 3);
    }

    #[test]
    fn non_empty_array() {
        let d = PayloadDescriptor::new("teams").field("teams", FieldKind::Array { min_len: 1 });
        assert!(d.validate(&serde_json::json!({"teams": []})).is_err());
        assert!(d.validate(&serde_json::json!({"teams": [1]})).is_ok());
    }
}
