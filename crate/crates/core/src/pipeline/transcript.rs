//! Ordered log of supervisor steps, data fetches and LLM exchanges.
//!
//! Serialized as JSON lines. Exchanges carry the full request, so a
//! transcript recorded against a live model can be written back into a
//! fixture directory and replayed offline.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::AgentId;
use crate::llm::{ChatBackend, ChatRequest, ChatResponse, FixtureStore, LlmError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TranscriptRecord {
    Step {
        step: u32,
        agent: AgentId,
        note: String,
    },
    Fetch {
        step: u32,
        agent: AgentId,
        kind: String,
        key: String,
    },
    Exchange {
        step: u32,
        agent: AgentId,
        label: String,
        fingerprint: String,
        request: ChatRequest,
        response: ChatResponse,
    },
}

impl TranscriptRecord {
    pub fn step(&self) -> u32 {
        match self {
            TranscriptRecord::Step { step, .. }
            | TranscriptRecord::Fetch { step, .. }
            | TranscriptRecord::Exchange { step, .. } => *step,
        }
    }

    pub fn agent(&self) -> AgentId {
        match self {
            TranscriptRecord::Step { agent, .. }
            | TranscriptRecord::Fetch { agent, .. }
            | TranscriptRecord::Exchange { agent, .. } => *agent,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub records: Vec<TranscriptRecord>,
}

impl Transcript {
    pub fn push(&mut self, record: TranscriptRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = TranscriptRecord>) {
        self.records.extend(records);
    }

    pub fn exchanges(&self) -> impl Iterator<Item = (&ChatRequest, &ChatResponse)> {
        self.records.iter().filter_map(|r| match r {
            TranscriptRecord::Exchange { request, response, .. } => Some((request, response)),
            _ => None,
        })
    }

    /// Number of LLM calls recorded.
    pub fn llm_calls(&self) -> usize {
        self.exchanges().count()
    }

    pub fn llm_calls_by(&self, agent: AgentId) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, TranscriptRecord::Exchange { .. }) && r.agent() == agent)
            .count()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, String> {
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
        }
        Ok(Transcript { records })
    }

    /// Writes every exchange into `store` so a mock backend can serve it.
    /// Returns the number of fixtures written.
    pub fn replay_into(&self, store: &FixtureStore) -> Result<usize, LlmError> {
        let mut n = 0;
        for r in &self.records {
            if let TranscriptRecord::Exchange {
                agent,
                label,
                request,
                response,
                ..
            } = r
            {
                let description = format!("{}/{label}: {}", agent.as_str(), request.last_user_text());
                store.put(&request.fingerprint(), &response.content, &description)?;
                n += 1;
            }
        }
        Ok(n)
    }

    /// A backend answering each recorded request with its recorded response.
    pub fn replay_backend(&self) -> ReplayBackend {
        ReplayBackend {
            responses: self
                .exchanges()
                .map(|(q, r)| (q.fingerprint(), r.clone()))
                .collect(),
        }
    }
}

/// Serves the responses of a transcript, keyed by request fingerprint.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    responses: BTreeMap<String, ChatResponse>,
}

impl ReplayBackend {
    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl ChatBackend for ReplayBackend {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let fingerprint = request.fingerprint();
        self.responses.get(&fingerprint).cloned().ok_or_else(|| LlmError::MissingFixture {
            preview: request.last_user_text().chars().take(120).collect(),
            fingerprint,
        })
    }
}
