use super::{Question, QuestionId};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("invalid lecture path `{0}`: expected course/tutorial/lecture with [A-Za-z0-9_-] segments")]
    InvalidPath(String),
    #[error("question {question} already belongs to lecture {lecture}")]
    QuestionInOtherLecture { question: QuestionId, lecture: LectureId },
}

/// Globally unique lecture key, `course.tutorial.lecture`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LectureId(String);

impl LectureId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LectureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LectureId {
    fn from(s: &str) -> Self {
        LectureId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LecturePath {
    pub course: String,
    pub tutorial: String,
    pub lecture: String,
}

impl LecturePath {
    pub fn lecture_id(&self) -> LectureId {
        LectureId(format!("{}.{}.{}", self.course, self.tutorial, self.lecture))
    }
}

impl FromStr for LecturePath {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let valid = |seg: &str| {
            !seg.is_empty()
                && seg
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        };
        match s.split('/').collect::<Vec<_>>().as_slice() {
            [c, t, l] if valid(c) && valid(t) && valid(l) => Ok(LecturePath {
                course: (*c).to_owned(),
                tutorial: (*t).to_owned(),
                lecture: (*l).to_owned(),
            }),
            _ => Err(CatalogError::InvalidPath(s.to_owned())),
        }
    }
}

impl fmt::Display for LecturePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.course, self.tutorial, self.lecture)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lecture {
    pub id: LectureId,
    pub title: String,
    pub question_ids: Vec<QuestionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tutorial {
    pub id: String,
    pub title: String,
    pub lectures: Vec<Lecture>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Course {
    pub id: String,
    pub title: String,
    pub tutorials: Vec<Tutorial>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ImportOutcome {
    pub added: usize,
    pub skipped: usize,
}

/// Course tree plus the question bank it points into.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    courses: Vec<Course>,
    questions: HashMap<QuestionId, Question>,
    owner: HashMap<QuestionId, LectureId>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn courses(&self) -> &[Course] {
        &self.courses
    }

    pub fn question(&self, id: &QuestionId) -> Option<&Question> {
        self.questions.get(id)
    }

    pub fn lecture(&self, id: &LectureId) -> Option<&Lecture> {
        self.lectures().find(|l| &l.id == id)
    }

    pub fn lectures(&self) -> impl Iterator<Item = &Lecture> {
        self.courses
            .iter()
            .flat_map(|c| &c.tutorials)
            .flat_map(|t| &t.lectures)
    }

    pub fn lecture_questions(&self, id: &LectureId) -> Vec<&Question> {
        self.lecture(id)
            .map(|l| l.question_ids.iter().filter_map(|q| self.questions.get(q)).collect())
            .unwrap_or_default()
    }

    /// Checks an import without applying it.
    pub fn plan_import(&self, path: &LecturePath, questions: &[Question]) -> Result<ImportOutcome, CatalogError> {
        let target = path.lecture_id();
        let mut seen = std::collections::HashSet::new();
        let mut outcome = ImportOutcome::default();
        for q in questions {
            match self.owner.get(&q.id) {
                Some(l) if *l != target => {
                    return Err(CatalogError::QuestionInOtherLecture {
                        question: q.id.clone(),
                        lecture: l.clone(),
                    })
                }
                Some(_) => outcome.skipped += 1,
                None if !seen.insert(&q.id) => outcome.skipped += 1,
                None => outcome.added += 1,
            }
        }
        Ok(outcome)
    }

    /// Upserts questions into a lecture by content hash, creating the
    /// course, tutorial and lecture as needed. All-or-nothing.
    pub fn import(&mut self, path: &LecturePath, questions: Vec<Question>) -> Result<ImportOutcome, CatalogError> {
        let outcome = self.plan_import(path, &questions)?;
        let lecture_id = path.lecture_id();
        let lecture = self.lecture_entry(path);
        let mut fresh = Vec::new();
        for q in questions {
            if !lecture.question_ids.contains(&q.id) {
                lecture.question_ids.push(q.id.clone());
                fresh.push(q);
            }
        }
        for q in fresh {
            self.owner.insert(q.id.clone(), lecture_id.clone());
            self.questions.insert(q.id.clone(), q);
        }
        Ok(outcome)
    }

    fn lecture_entry(&mut self, path: &LecturePath) -> &mut Lecture {
        let ci = match self.courses.iter().position(|c| c.id == path.course) {
            Some(i) => i,
            None => {
                self.courses.push(Course {
                    id: path.course.clone(),
                    title: path.course.clone(),
                    tutorials: Vec::new(),
                });
                self.courses.len() - 1
            }
        };
        let course = &mut self.courses[ci];
        let ti = match course.tutorials.iter().position(|t| t.id == path.tutorial) {
            Some(i) => i,
            None => {
                course.tutorials.push(Tutorial {
                    id: path.tutorial.clone(),
                    title: path.tutorial.clone(),
                    lectures: Vec::new(),
                });
                course.tutorials.len() - 1
            }
        };
        let tutorial = &mut course.tutorials[ti];
        let id = path.lecture_id();
        let li = match tutorial.lectures.iter().position(|l| l.id == id) {
            Some(i) => i,
            None => {
                tutorial.lectures.push(Lecture {
                    id,
                    title: path.lecture.clone(),
                    question_ids: Vec::new(),
                });
                tutorial.lectures.len() - 1
            }
        };
        &mut tutorial.lectures[li]
    }
}
