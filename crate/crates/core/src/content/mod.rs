//! Question bank data model.
//!
//! Questions live in lectures, lectures in tutorials, tutorials in courses.
//! TeX in stems, choices and explanations is carried as opaque text; nothing
//! here interprets it.

mod catalog;
mod parse;
mod shuffle;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

pub use catalog::{Catalog, CatalogError, Course, ImportOutcome, Lecture, LectureId, LecturePath, Tutorial};
pub use parse::{parse_tex_questions, serialize_tex_questions, ParseError};
pub use shuffle::shuffle_choices;

/// Content-hash identifier of a question.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuestionId(String);

impl QuestionId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Hash of the exact stem, choice and explanation bytes. Choices are
    /// framed in file order with their correctness flag, so reordering or
    /// editing any character yields a new identity.
    pub fn from_content(stem: &str, choices: &[Choice], explanation: &str) -> Self {
        fn frame(h: &mut Sha256, tag: u8, bytes: &[u8]) {
            h.update([tag]);
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        let mut h = Sha256::new();
        frame(&mut h, b'S', stem.as_bytes());
        for c in choices {
            frame(&mut h, if c.correct { b'T' } else { b'F' }, c.text.as_bytes());
        }
        frame(&mut h, b'E', explanation.as_bytes());
        let digest = h.finalize();
        QuestionId(hex::encode(&digest[..16]))
    }
}

impl fmt::Display for QuestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for QuestionId {
    fn from(s: &str) -> Self {
        QuestionId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub text: String,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuestionError {
    #[error("question needs at least 2 choices, got {0}")]
    TooFewChoices(usize),
    #[error("question needs exactly one correct choice, got {0}")]
    CorrectCount(usize),
    #[error("choice {0} is empty")]
    EmptyChoice(usize),
}

/// A multiple-choice question with exactly one correct answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: QuestionId,
    pub stem: String,
    pub choices: Vec<Choice>,
    pub explanation: String,
    /// Reserved for an illustration; the TeX importer never sets it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_url: Option<String>,
}

impl Question {
    pub fn new(
        stem: impl Into<String>,
        choices: Vec<Choice>,
        explanation: impl Into<String>,
    ) -> Result<Self, QuestionError> {
        let stem = stem.into();
        let explanation = explanation.into();
        if choices.len() < 2 {
            return Err(QuestionError::TooFewChoices(choices.len()));
        }
        let correct = choices.iter().filter(|c| c.correct).count();
        if correct != 1 {
            return Err(QuestionError::CorrectCount(correct));
        }
        if let Some(i) = choices.iter().position(|c| c.text.trim().is_empty()) {
            return Err(QuestionError::EmptyChoice(i));
        }
        let id = QuestionId::from_content(&stem, &choices, &explanation);
        Ok(Question {
            id,
            stem,
            choices,
            explanation,
            image_url: None,
        })
    }

    pub fn correct_index(&self) -> usize {
        self.choices
            .iter()
            .position(|c| c.correct)
            .expect("validated question has a correct choice")
    }
}
