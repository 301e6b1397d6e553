//! Offline-tolerant answer synchronisation.
//!
//! Clients hold a question allocation with answer keys, record answers
//! locally and upload them in batches whenever a connection is available.
//! The server keeps an append-only journal; every piece of derived state
//! (histories, grades, difficulty counts) is a replay of that journal.

mod http;
mod journal;
mod service;
mod wire;

pub use http::router;
pub use journal::{FileJournal, Journal, JournalEntry, MemoryJournal, StoreError};
pub use service::{derive_history, Caller, DerivedHistory, LectureSettings, SyncService, TIMEOUT_TOLERANCE_SECS};
pub use wire::{
    Ack, AllocationPayload, AnswerRecord, CatalogCourse, CatalogLecture, CatalogTutorial, ClassId,
    ExportRow, NewUser, ProgressRow, QuestionPayload, RecordAck, RecordStatus, StoredAnswer, UploadBatch,
    UserRecord,
};

use crate::allocation::AllocationError;
use crate::content::CatalogError;
use crate::grading::PolicyError;

#[derive(Debug, thiserror::Error)]
pub enum SyncError {
    #[error("unknown lecture {0}")]
    UnknownLecture(String),
    #[error("missing or invalid credentials")]
    Unauthorized,
    #[error("forbidden")]
    Forbidden,
    #[error("user {0} already exists")]
    UserExists(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Store(#[from] StoreError),
}
