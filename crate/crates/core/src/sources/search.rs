use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::SourceError;
use crate::http::{send_with_retry, HttpError, HttpRequest, HttpTransport, RetryPolicy};

pub const SEARCH_KEY_ENV: &str = "FANCRIC_SEARCH_KEY";

const INDEX_FILE: &str = "index.tsv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchAnswer {
    pub query: String,
    pub answer: String,
    pub sources: Vec<String>,
    pub fetched_at: DateTime<Utc>,
}

pub trait SearchClient: Send + Sync {
    fn search(&self, query: &str) -> Result<SearchAnswer, SourceError>;
}

/// Checks the query and the answer around a client call.
pub fn search_answer(query: &str, client: &dyn SearchClient) -> Result<SearchAnswer, SourceError> {
    if query.trim().is_empty() {
        return Err(SourceError::InvalidInput("empty search query".into()));
    }
    let answer = client.search(query)?;
    if answer.answer.trim().is_empty() {
        return Err(SourceError::EmptyAnswer(query.to_string()));
    }
    Ok(answer)
}

/// File-name slug for a query: readable prefix plus a short hash.
pub fn slug_for(query: &str) -> String {
    let mut readable: String = query
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect();
    while readable.contains("--") {
        readable = readable.replace("--", "-");
    }
    let readable: String = readable.trim_matches('-').chars().take(48).collect();
    let hash = hex::encode(Sha256::digest(query.as_bytes()));
    format!("{}-{}", readable.trim_end_matches('-'), &hash[..8])
}

type Index = BTreeMap<String, (String, Vec<String>)>;

fn read_index(dir: &std::path::Path) -> Result<Index, SourceError> {
    let text = match fs::read_to_string(dir.join(INDEX_FILE)) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = BTreeMap::new();
    for line in text.lines().skip(1) {
        let mut parts = line.splitn(3, '\t');
        let (Some(q), Some(slug)) = (parts.next(), parts.next()) else {
            continue;
        };
        let sources = parts
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(str::to_string)
            .collect();
        out.insert(q.to_string(), (slug.to_string(), sources));
    }
    Ok(out)
}

/// Answers keyed by exact query string via `index.tsv` (`query`, `slug`, `sources`).
pub struct FixtureSearch {
    dir: PathBuf,
    fetched_at: DateTime<Utc>,
}

impl FixtureSearch {
    pub fn new(dir: impl Into<PathBuf>, fetched_at: DateTime<Utc>) -> Self {
        FixtureSearch {
            dir: dir.into(),
            fetched_at,
        }
    }
}

impl SearchClient for FixtureSearch {
    fn search(&self, query: &str) -> Result<SearchAnswer, SourceError> {
        let index = read_index(&self.dir)?;
        let (slug, sources) = index.get(query).ok_or_else(|| SourceError::MissingFixture {
            kind: "search",
            key: query.to_string(),
        })?;
        let answer = fs::read_to_string(self.dir.join(format!("{slug}.txt")))?;
        Ok(SearchAnswer {
            query: query.to_string(),
            answer,
            sources: sources.clone(),
            fetched_at: self.fetched_at,
        })
    }
}

/// Tavily-compatible search endpoint.
pub struct TavilySearch {
    transport: Arc<dyn HttpTransport>,
    base_url: String,
    api_key: String,
    retry: RetryPolicy,
}

impl TavilySearch {
    pub const DEFAULT_URL: &'static str = "https://api.tavily.com/search";

    pub fn new(transport: Arc<dyn HttpTransport>, base_url: impl Into<String>, api_key: impl Into<String>) -> Self {
        TavilySearch {
            transport,
            base_url: base_url.into(),
            api_key: api_key.into(),
            retry: RetryPolicy::default(),
        }
    }

    /// Reads the key from `FANCRIC_SEARCH_KEY`.
    pub fn from_env(transport: Arc<dyn HttpTransport>) -> Result<Self, SourceError> {
        let key = std::env::var(SEARCH_KEY_ENV)
            .map_err(|_| SourceError::Auth(format!("environment variable {SEARCH_KEY_ENV} is not set")))?;
        Ok(Self::new(transport, Self::DEFAULT_URL, key))
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }
}

impl SearchClient for TavilySearch {
    fn search(&self, query: &str) -> Result<SearchAnswer, SourceError> {
        let body = json!({
            "api_key": self.api_key,
            "query": query,
            "include_answer": true,
            "max_results": 5,
        });
        let req = HttpRequest::post_json(&self.base_url, body.to_string());
        let resp = send_with_retry(self.transport.as_ref(), &req, &self.retry).map_err(|e| match e {
            HttpError::Status { status: 401 | 403, body } => SourceError::Auth(body),
            other => SourceError::Http(other),
        })?;
        let v: Value = serde_json::from_str(&resp.body).map_err(|e| SourceError::Protocol(e.to_string()))?;
        let answer = v["answer"].as_str().unwrap_or_default().to_string();
        let sources = v["results"]
            .as_array()
            .map(|rs| rs.iter().filter_map(|r| r["url"].as_str().map(str::to_string)).collect())
            .unwrap_or_default();
        Ok(SearchAnswer {
            query: query.to_string(),
            answer,
            sources,
            fetched_at: Utc::now(),
        })
    }
}

/// Passes queries through and writes each answer into a fixture directory.
pub struct RecordingSearch<C> {
    inner: C,
    dir: PathBuf,
    lock: Mutex<()>,
}

impl<C: SearchClient> RecordingSearch<C> {
    pub fn new(inner: C, dir: impl Into<PathBuf>) -> Self {
        RecordingSearch {
            inner,
            dir: dir.into(),
            lock: Mutex::new(()),
        }
    }
}

impl<C: SearchClient> SearchClient for RecordingSearch<C> {
    fn search(&self, query: &str) -> Result<SearchAnswer, SourceError> {
        let answer = self.inner.search(query)?;
        let _guard = self.lock.lock().unwrap();
        fs::create_dir_all(&self.dir)?;
        let slug = slug_for(query);
        fs::write(self.dir.join(format!("{slug}.txt")), &answer.answer)?;
        let mut index = read_index(&self.dir)?;
        index.insert(query.to_string(), (slug, answer.sources.clone()));
        let mut out = String::from("query\tslug\tsources\n");
        for (q, (s, srcs)) in index {
            out.push_str(&format!("{q}\t{s}\t{}\n", srcs.join(" ")));
        }
        fs::write(self.dir.join(INDEX_FILE), out)?;
        Ok(answer)
    }
}
