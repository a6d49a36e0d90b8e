//! Sessions and their append-only transcripts.
//!
//! On disk each session is `{data_dir}/{session_id}.jsonl`: a header record
//! followed by one record per turn and one per completed answer.
//!
//! ```text
//! {"record":"header","session_id":"…","created_at":"2024-12-01T00:00:00Z"}
//! {"record":"turn","turn":{"role":"user","content":{"type":"text","text":"…"}}}
//! {"record":"answer","answer":{…}}
//! ```

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use super::Answer;
use crate::clock::Clock;
use crate::protocol::ConversationTurn;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("session `{0}` already exists")]
    AlreadyExists(String),
    #[error("invalid session id `{0}`")]
    InvalidId(String),
    #[error("transcript store: {0}")]
    Store(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum TranscriptRecord {
    Header { session_id: String, created_at: String },
    Turn { turn: ConversationTurn },
    Answer { answer: Answer },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: String,
    pub created_at: String,
    pub turns: Vec<ConversationTurn>,
}

#[derive(Debug, Default)]
pub struct SessionState {
    pub turns: Vec<ConversationTurn>,
    pub answers: Vec<Answer>,
}

/// One conversation. Turns on a session are serialized by its lock.
#[derive(Debug)]
pub struct Session {
    id: String,
    created_at: String,
    file: Option<PathBuf>,
    state: Mutex<SessionState>,
}

impl Session {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn created_at(&self) -> &str {
        &self.created_at
    }

    pub fn lock(&self) -> MutexGuard<'_, SessionState> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn transcript(&self) -> Transcript {
        Transcript { session_id: self.id.clone(), created_at: self.created_at.clone(), turns: self.lock().turns.clone() }
    }

    pub fn last_answer(&self) -> Option<Answer> {
        self.lock().answers.last().cloned()
    }

    /// Appends turns and an answer, writing them to disk before updating the
    /// in-memory state. The caller holds the state lock.
    pub(crate) fn commit(&self, state: &mut SessionState, turns: Vec<ConversationTurn>, answer: Answer) -> Result<(), SessionError> {
        if let Some(path) = &self.file {
            let mut lines = String::new();
            for t in &turns {
                lines.push_str(&record_line(&TranscriptRecord::Turn { turn: t.clone() })?);
            }
            lines.push_str(&record_line(&TranscriptRecord::Answer { answer: answer.clone() })?);
            let mut f = OpenOptions::new().append(true).open(path).map_err(|e| store_err(path, e))?;
            f.write_all(lines.as_bytes()).map_err(|e| store_err(path, e))?;
            f.flush().map_err(|e| store_err(path, e))?;
        }
        state.turns.extend(turns);
        state.answers.push(answer);
        Ok(())
    }
}

fn store_err(path: &Path, e: impl std::fmt::Display) -> SessionError {
    SessionError::Store(format!("{}: {e}", path.display()))
}

fn record_line(r: &TranscriptRecord) -> Result<String, SessionError> {
    let mut s = serde_json::to_string(r).map_err(|e| SessionError::Store(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

/// Session cache in front of an optional JSONL directory.
#[derive(Debug)]
pub struct SessionStore {
    dir: Option<PathBuf>,
    clock: Clock,
    sessions: Mutex<HashMap<String, Arc<Session>>>,
}

impl SessionStore {
    pub fn in_memory(clock: Clock) -> Self {
        Self { dir: None, clock, sessions: Mutex::new(HashMap::new()) }
    }

    pub fn on_disk(dir: impl Into<PathBuf>, clock: Clock) -> Result<Self, SessionError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| store_err(&dir, e))?;
        Ok(Self { dir: Some(dir), clock, sessions: Mutex::new(HashMap::new()) })
    }

    pub fn create(&self) -> Result<Arc<Session>, SessionError> {
        self.create_with_id(&uuid::Uuid::new_v4().to_string())
    }

    pub fn create_with_id(&self, id: &str) -> Result<Arc<Session>, SessionError> {
        if !valid_id(id) {
            return Err(SessionError::InvalidId(id.to_owned()));
        }
        let mut map = self.sessions.lock().unwrap_or_else(|p| p.into_inner());
        let file = self.dir.as_ref().map(|d| d.join(format!("{id}.jsonl")));
        if map.contains_key(id) || file.as_ref().is_some_and(|f| f.exists()) {
            return Err(SessionError::AlreadyExists(id.to_owned()));
        }
        let created_at = self.clock.now_rfc3339();
        if let Some(path) = &file {
            let header = record_line(&TranscriptRecord::Header { session_id: id.to_owned(), created_at: created_at.clone() })?;
            let mut f = OpenOptions::new().write(true).create_new(true).open(path).map_err(|e| store_err(path, e))?;
            f.write_all(header.as_bytes()).map_err(|e| store_err(path, e))?;
        }
        let s = Arc::new(Session { id: id.to_owned(), created_at, file, state: Mutex::new(SessionState::default()) });
        map.insert(id.to_owned(), s.clone());
        Ok(s)
    }

    /// Cached session, or one reloaded from its transcript file.
    pub fn get(&self, id: &str) -> Result<Arc<Session>, SessionError> {
        if !valid_id(id) {
            return Err(SessionError::NotFound(id.to_owned()));
        }
        let mut map = self.sessions.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(s) = map.get(id) {
            return Ok(s.clone());
        }
        let Some(dir) = &self.dir else {
            return Err(SessionError::NotFound(id.to_owned()));
        };
        let path = dir.join(format!("{id}.jsonl"));
        if !path.exists() {
            return Err(SessionError::NotFound(id.to_owned()));
        }
        let s = Arc::new(load_session(&path)?);
        map.insert(id.to_owned(), s.clone());
        Ok(s)
    }
}

fn load_session(path: &Path) -> Result<Session, SessionError> {
    let f = File::open(path).map_err(|e| store_err(path, e))?;
    let mut header = None;
    let mut state = SessionState::default();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| store_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TranscriptRecord = serde_json::from_str(&line).map_err(|e| store_err(path, format!("line {}: {e}", i + 1)))?;
        match rec {
            TranscriptRecord::Header { session_id, created_at } => header = Some((session_id, created_at)),
            TranscriptRecord::Turn { turn } => state.turns.push(turn),
            TranscriptRecord::Answer { answer } => state.answers.push(answer),
        }
    }
    let (id, created_at) = header.ok_or_else(|| store_err(path, "missing header record"))?;
    Ok(Session { id, created_at, file: Some(path.to_owned()), state: Mutex::new(state) })
}
