//! Append-only journal: one JSON entry per line, fsync'd per append.
//!
//! A line is committed once its trailing newline is on disk. On open, a
//! torn final line (no newline, or unparsable with nothing after it) is
//! truncated away; damage anywhere else is reported as corruption.

use super::wire::{StoredAnswer, UserRecord};
use crate::allocation::{AllocatedQuestion, StudentId};
use crate::content::{LectureId, LecturePath, Question};
use crate::grading::GradePolicy;
use crate::pacing::TimeoutPolicy;
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt store {path}: line {line}: {reason}")]
    Corrupt { path: PathBuf, line: usize, reason: String },
    #[error("store {0} is locked by another process")]
    Locked(PathBuf),
    #[error("cannot encode journal entry: {0}")]
    Encode(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum JournalEntry {
    #[serde(rename_all = "camelCase")]
    Import {
        lecture: LecturePath,
        grade_policy: GradePolicy,
        timeout_policy: TimeoutPolicy,
        questions: Vec<Question>,
    },
    #[serde(rename_all = "camelCase")]
    Allocate {
        student: StudentId,
        lecture: LectureId,
        added: Vec<AllocatedQuestion>,
    },
    #[serde(rename_all = "camelCase")]
    Answers {
        student: StudentId,
        lecture: LectureId,
        answers: Vec<StoredAnswer>,
    },
    #[serde(rename_all = "camelCase")]
    User { user: UserRecord },
}

pub trait Journal: Send {
    /// Durably appends one entry. On error nothing is committed.
    fn append(&mut self, entry: &JournalEntry) -> Result<(), StoreError>;
}

pub struct FileJournal {
    path: PathBuf,
    file: File,
}

impl FileJournal {
    pub const FILE_NAME: &'static str = "journal.ndjson";

    /// Opens (creating if needed) the journal in `dir`, takes an exclusive
    /// lock on it, and returns the committed entries.
    pub fn open(dir: &Path) -> Result<(Self, Vec<JournalEntry>), StoreError> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(Self::FILE_NAME);
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;
        match file.try_lock() {
            Ok(()) => {}
            Err(std::fs::TryLockError::WouldBlock) => return Err(StoreError::Locked(path)),
            Err(std::fs::TryLockError::Error(e)) => return Err(e.into()),
        }
        let mut raw = Vec::new();
        file.read_to_end(&mut raw)?;
        let (entries, good_len) = Self::scan(&path, &raw)?;
        if good_len < raw.len() {
            tracing::warn!(
                path = %path.display(),
                dropped = raw.len() - good_len,
                "truncating torn journal tail"
            );
            file.set_len(good_len as u64)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::End(0))?;
        Ok((FileJournal { path, file }, entries))
    }

    /// Reads the committed entries without locking or repairing.
    pub fn read(dir: &Path) -> Result<Vec<JournalEntry>, StoreError> {
        let path = dir.join(Self::FILE_NAME);
        let raw = match std::fs::read(&path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        Ok(Self::scan(&path, &raw)?.0)
    }

    fn scan(path: &Path, raw: &[u8]) -> Result<(Vec<JournalEntry>, usize), StoreError> {
        let mut entries = Vec::new();
        let mut offset = 0;
        let mut line_no = 0;
        while offset < raw.len() {
            line_no += 1;
            let Some(nl) = raw[offset..].iter().position(|&b| b == b'\n') else {
                // no newline: never committed
                break;
            };
            let line = &raw[offset..offset + nl];
            let end = offset + nl + 1;
            match serde_json::from_slice::<JournalEntry>(line) {
                Ok(e) => entries.push(e),
                Err(_) if end == raw.len() && !line.ends_with(b"}") => break,
                Err(e) => {
                    return Err(StoreError::Corrupt {
                        path: path.to_owned(),
                        line: line_no,
                        reason: e.to_string(),
                    })
                }
            }
            offset = end;
        }
        Ok((entries, offset))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Journal for FileJournal {
    fn append(&mut self, entry: &JournalEntry) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(entry)?;
        line.push(b'\n');
        let before = self.file.metadata()?.len();
        let res = self.file.write_all(&line).and_then(|_| self.file.sync_data());
        if let Err(e) = res {
            // roll back a partial write so the journal stays well-formed
            let _ = self.file.set_len(before);
            return Err(e.into());
        }
        Ok(())
    }
}

/// In-memory journal; clones share the same entry list.
#[derive(Debug, Clone, Default)]
pub struct MemoryJournal {
    entries: Arc<Mutex<Vec<JournalEntry>>>,
}

impl MemoryJournal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> Vec<JournalEntry> {
        self.entries.lock().clone()
    }
}

impl Journal for MemoryJournal {
    fn append(&mut self, entry: &JournalEntry) -> Result<(), StoreError> {
        self.entries.lock().push(entry.clone());
        Ok(())
    }
}
