//! JSON shapes exchanged with drill clients and stored in the journal.

use crate::allocation::{AllocationToken, StudentId};
use crate::content::{Choice, LectureId, QuestionId};
use crate::grading::GradePolicy;
use crate::pacing::TimeoutPolicy;
use serde::{Deserialize, Serialize};

pub type ClassId = String;

/// One answer as recorded on the device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnswerRecord {
    pub token: AllocationToken,
    pub client_seq: u64,
    /// Canonical (unshuffled) index of the chosen answer; absent on timeout.
    #[serde(default)]
    pub chosen_index: Option<usize>,
    pub time_taken: f64,
    #[serde(default)]
    pub timed_out: bool,
    pub client_timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UploadBatch {
    pub student_id: StudentId,
    pub lecture_id: LectureId,
    pub records: Vec<AnswerRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "reason")]
pub enum RecordStatus {
    Accepted,
    Duplicate,
    Rejected(String),
}

impl RecordStatus {
    pub fn rejected(reason: &str) -> Self {
        RecordStatus::Rejected(reason.to_owned())
    }

    /// Whether the client may drop the record from its upload queue.
    pub fn settled(&self) -> bool {
        !matches!(self, RecordStatus::Rejected(r) if r == "unknown_token")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordAck {
    pub client_seq: u64,
    #[serde(flatten)]
    pub status: RecordStatus,
}

/// One status per uploaded record, in upload order, plus the server's grade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Ack {
    pub statuses: Vec<RecordAck>,
    pub grade: f64,
    pub answered: usize,
}

/// A validated answer as written to the journal. `correct` is computed by
/// the server from the canonical question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StoredAnswer {
    pub seq: u64,
    pub token: AllocationToken,
    pub question: QuestionId,
    pub chosen: Option<usize>,
    pub correct: bool,
    pub timed_out: bool,
    pub time_taken: f64,
    pub client_ts: i64,
    pub server_ts: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QuestionPayload {
    pub token: AllocationToken,
    pub stem: String,
    pub choices: Vec<Choice>,
    pub explanation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AllocationPayload {
    pub lecture_id: LectureId,
    pub questions: Vec<QuestionPayload>,
    pub grade_policy: GradePolicy,
    pub timeout_policy: TimeoutPolicy,
    pub grade: f64,
    pub answered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CatalogLecture {
    pub id: LectureId,
    pub title: String,
    pub question_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CatalogTutorial {
    pub id: String,
    pub title: String,
    pub lectures: Vec<CatalogLecture>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CatalogCourse {
    pub id: String,
    pub title: String,
    pub tutorials: Vec<CatalogTutorial>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProgressRow {
    pub student: StudentId,
    pub lecture: LectureId,
    pub answered: usize,
    pub grade: f64,
    pub last_activity: Option<i64>,
}

/// One line of the answer export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExportRow {
    pub student: StudentId,
    pub lecture: LectureId,
    pub seq: u64,
    pub question: QuestionId,
    pub chosen: Option<usize>,
    pub correct: bool,
    pub timed_out: bool,
    pub time_taken: f64,
    pub client_ts: i64,
    pub server_ts: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UserRecord {
    pub id: StudentId,
    /// SHA-256 of the bearer token, hex.
    pub token_hash: String,
    #[serde(default)]
    pub class: Option<ClassId>,
    #[serde(default)]
    pub tutor_of: Vec<ClassId>,
    #[serde(default)]
    pub admin: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NewUser {
    pub id: StudentId,
    #[serde(default)]
    pub class: Option<ClassId>,
    #[serde(default)]
    pub tutor_of: Vec<ClassId>,
    #[serde(default)]
    pub admin: bool,
}
