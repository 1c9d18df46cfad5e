use std::collections::{BTreeMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use super::{ChatBackend, ChatRequest, ChatResponse, LlmError, TokenUsage};

const INDEX_FILE: &str = "index.tsv";

/// Directory of `<fingerprint>.txt` responses plus a tab-separated index.
#[derive(Debug)]
pub struct FixtureStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

fn one_line(text: &str, max_chars: usize) -> String {
    let flat: String = text
        .chars()
        .map(|c| if c.is_whitespace() { ' ' } else { c })
        .collect();
    let mut words = flat.split_whitespace().collect::<Vec<_>>().join(" ");
    if let Some((cut, _)) = words.char_indices().nth(max_chars) {
        words.truncate(cut);
    }
    words
}

fn word_count(text: &str) -> u32 {
    text.split_whitespace().count() as u32
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureStore {
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, fingerprint: &str) -> PathBuf {
        self.dir.join(format!("{fingerprint}.txt"))
    }

    pub fn get(&self, fingerprint: &str) -> Result<Option<String>, LlmError> {
        match fs::read_to_string(self.path_for(fingerprint)) {
            Ok(s) => Ok(Some(s)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(LlmError::Fixture(e.to_string())),
        }
    }

    pub fn index(&self) -> Result<BTreeMap<String, String>, LlmError> {
        let text = match fs::read_to_string(self.dir.join(INDEX_FILE)) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
            Err(e) => return Err(LlmError::Fixture(e.to_string())),
        };
        Ok(text
            .lines()
            .skip(1)
            .filter_map(|l| l.split_once('\t'))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect())
    }

    /// Writes a response file and updates the index.
    pub fn put(&self, fingerprint: &str, content: &str, description: &str) -> Result<(), LlmError> {
        let _guard = self.write_lock.lock().unwrap();
        let io = |e: std::io::Error| LlmError::Fixture(e.to_string());
        fs::create_dir_all(&self.dir).map_err(io)?;
        fs::write(self.path_for(fingerprint), content).map_err(io)?;
        let mut index = self.index()?;
        index.insert(fingerprint.to_string(), one_line(description, 100));
        let mut out = String::from("fingerprint\tdescription\n");
        for (k, v) in index {
            out.push_str(&k);
            out.push('\t');
            out.push_str(&v);
            out.push('\n');
        }
        fs::write(self.dir.join(INDEX_FILE), out).map_err(io)
    }
}

/// Answers from the fixture directory and fails on unknown requests.
#[derive(Debug)]
pub struct MockBackend {
    store: FixtureStore,
}

impl MockBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        MockBackend {
            store: FixtureStore::new(dir),
        }
    }

    pub fn store(&self) -> &FixtureStore {
        &self.store
    }
}

impl ChatBackend for MockBackend {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let fingerprint = request.fingerprint();
        match self.store.get(&fingerprint)? {
            Some(content) => Ok(ChatResponse {
                token_usage: TokenUsage {
                    prompt: request.messages.iter().map(|m| word_count(&m.content)).sum(),
                    completion: word_count(&content),
                },
                content,
                model_used: format!("fixture:{}", request.model_tag),
                latency_ms: 0,
            }),
            None => Err(LlmError::MissingFixture {
                fingerprint,
                preview: one_line(request.last_user_text(), 120),
            }),
        }
    }
}

/// Passes requests through and saves each response as a fixture.
pub struct RecordingBackend<B> {
    inner: B,
    store: FixtureStore,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> Self {
        RecordingBackend {
            inner,
            store: FixtureStore::new(dir),
        }
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let resp = self.inner.send(request)?;
        let description = format!("{}: {}", request.model_tag, request.last_user_text());
        self.store.put(&request.fingerprint(), &resp.content, &description)?;
        Ok(resp)
    }
}

/// Returns queued outcomes in order regardless of the request.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    queue: Mutex<VecDeque<Result<String, LlmError>>>,
    seen: Mutex<Vec<ChatRequest>>,
}

impl ScriptedBackend {
    pub fn new(outcomes: impl IntoIterator<Item = Result<String, LlmError>>) -> Self {
        ScriptedBackend {
            queue: Mutex::new(outcomes.into_iter().collect()),
            seen: Mutex::new(Vec::new()),
        }
    }

    pub fn replies<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self::new(replies.into_iter().map(|s| Ok(s.into())))
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.seen.lock().unwrap().clone()
    }
}

impl ChatBackend for ScriptedBackend {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        self.seen.lock().unwrap().push(request.clone());
        let next = self
            .queue
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| Err(LlmError::Protocol("script exhausted".into())));
        next.map(|content| ChatResponse {
            token_usage: TokenUsage {
                prompt: 0,
                completion: word_count(&content),
            },
            content,
            model_used: format!("scripted:{}", request.model_tag),
            latency_ms: 0,
        })
    }
}

/// Counts calls per model tag.
pub struct CountingBackend<B> {
    inner: B,
    total: AtomicU64,
    per_tag: Mutex<BTreeMap<String, u64>>,
}

impl<B: ChatBackend> CountingBackend<B> {
    pub fn new(inner: B) -> Self {
        CountingBackend {
            inner,
            total: AtomicU64::new(0),
            per_tag: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn calls(&self) -> u64 {
        self.total.load(Ordering::SeqCst)
    }

    pub fn calls_by_tag(&self) -> BTreeMap<String, u64> {
        self.per_tag.lock().unwrap().clone()
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: ChatBackend> ChatBackend for CountingBackend<B> {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        self.total.fetch_add(1, Ordering::SeqCst);
        *self
            .per_tag
            .lock()
            .unwrap()
            .entry(request.model_tag.clone())
            .or_default() += 1;
        self.inner.send(request)
    }
}
