use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{prompt_digest, Backend, Prompt};

/// One line of a transcript file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    pub response: String,
}

/// Content-addressed prompt → response fixtures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranscriptStore {
    entries: BTreeMap<String, TranscriptEntry>,
}

impl TranscriptStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Records `response` for `prompt`, keeping the prompt text for audits.
    pub fn insert(&mut self, prompt: &Prompt, response: impl Into<String>) {
        let key = prompt.digest();
        let session = (!prompt.session_salt.is_empty()).then(|| prompt.session_salt.clone());
        self.entries.insert(
            key.clone(),
            TranscriptEntry {
                key,
                prompt: Some(prompt.rendered.clone()),
                session,
                response: response.into(),
            },
        );
    }

    pub fn insert_entry(&mut self, entry: TranscriptEntry) -> Result<()> {
        check_key(&entry)?;
        self.entries.insert(entry.key.clone(), entry);
        Ok(())
    }

    pub fn lookup(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.response.as_str())
    }

    pub fn entries(&self) -> impl Iterator<Item = &TranscriptEntry> {
        self.entries.values()
    }

    pub fn merge(&mut self, other: TranscriptStore) {
        self.entries.extend(other.entries);
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut store = Self::new();
        for (n, line) in reader.lines().enumerate() {
            let line_no = n + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            store.insert_entry(entry).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(store)
    }

    /// Entries are written sorted by key.
    pub fn to_writer<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for entry in self.entries.values() {
            serde_json::to_writer(&mut writer, entry)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }
}

fn check_key(entry: &TranscriptEntry) -> Result<()> {
    let well_formed = entry.key.len() == 64 && entry.key.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
    if !well_formed {
        return Err(Error::Precondition(format!(
            "transcript key `{}` is not 64 lower-case hex digits",
            entry.key
        )));
    }
    if let Some(prompt) = &entry.prompt {
        let expected = prompt_digest(prompt, entry.session.as_deref().unwrap_or(""));
        if expected != entry.key {
            return Err(Error::Precondition(format!(
                "transcript key {} does not match its prompt (expected {expected})",
                entry.key
            )));
        }
    }
    Ok(())
}

/// Replays a [`TranscriptStore`].
#[derive(Debug, Clone)]
pub struct RecordedBackend {
    store: TranscriptStore,
}

impl RecordedBackend {
    pub fn new(store: TranscriptStore) -> Self {
        Self { store }
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        TranscriptStore::load(path).map(Self::new)
    }

    pub fn store(&self) -> &TranscriptStore {
        &self.store
    }
}

impl Backend for RecordedBackend {
    fn complete(&self, prompt: &Prompt) -> Result<String> {
        let key = prompt.digest();
        self.store
            .lookup(&key)
            .map(str::to_owned)
            .ok_or(Error::MissingFixture(key))
    }
}

/// Passes prompts to an inner backend and keeps every exchange, so a live
/// or authored session can be frozen into a transcript file.
pub struct RecordingBackend<B> {
    inner: B,
    store: Mutex<TranscriptStore>,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        Self {
            inner,
            store: Mutex::new(TranscriptStore::new()),
        }
    }

    pub fn snapshot(&self) -> TranscriptStore {
        self.store.lock().expect("transcript lock poisoned").clone()
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn complete(&self, prompt: &Prompt) -> Result<String> {
        let response = self.inner.complete(prompt)?;
        self.store
            .lock()
            .expect("transcript lock poisoned")
            .insert(prompt, response.clone());
        Ok(response)
    }
}
