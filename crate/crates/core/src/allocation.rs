//! Per-student question allocation and difficulty-matched selection.

use crate::content::{LectureId, QuestionId};
use crate::grading::{AnswerHistory, Grade};
use data_encoding::BASE32_NOPAD;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::{CryptoRng, Rng};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_MAX_ALLOCATION: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StudentId(String);

impl StudentId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StudentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StudentId {
    fn from(s: &str) -> Self {
        StudentId(s.to_owned())
    }
}

impl From<String> for StudentId {
    fn from(s: String) -> Self {
        StudentId(s)
    }
}

/// Opaque question reference: 16 random bytes, lower-case unpadded base32
/// (26 characters).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AllocationToken(String);

impl AllocationToken {
    pub const LEN: usize = 26;

    pub fn generate<R: Rng + CryptoRng + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; 16];
        rng.fill_bytes(&mut bytes);
        AllocationToken(BASE32_NOPAD.encode(&bytes).to_ascii_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AllocationToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AllocationToken {
    fn from(s: &str) -> Self {
        AllocationToken(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DifficultyStats {
    pub attempts: u64,
    pub incorrect: u64,
}

/// Laplace-smoothed proportion of incorrect answers; never 0 or 1.
pub fn difficulty(stats: DifficultyStats) -> f64 {
    (stats.incorrect as f64 + 1.0) / (stats.attempts as f64 + 2.0)
}

/// Difficulty counters that accept concurrent increments.
#[derive(Debug, Default)]
pub struct SharedDifficulty {
    attempts: AtomicU64,
    incorrect: AtomicU64,
}

impl SharedDifficulty {
    pub fn record(&self, correct: bool) {
        // incorrect first so a concurrent snapshot never sees incorrect > attempts
        if !correct {
            self.incorrect.fetch_add(1, Ordering::AcqRel);
        }
        self.attempts.fetch_add(1, Ordering::AcqRel);
    }

    pub fn snapshot(&self) -> DifficultyStats {
        let incorrect = self.incorrect.load(Ordering::Acquire);
        let attempts = self.attempts.load(Ordering::Acquire);
        DifficultyStats {
            attempts: attempts.max(incorrect),
            incorrect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AllocationError {
    #[error("lecture has no questions")]
    EmptyLecture,
    #[error("allocation is empty")]
    EmptyAllocation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocatedQuestion {
    pub token: AllocationToken,
    pub question: QuestionId,
}

#[derive(Debug, Clone)]
pub struct StudentLectureState {
    pub student: StudentId,
    pub lecture: LectureId,
    pub allocation: Vec<AllocatedQuestion>,
    pub history: AnswerHistory,
    pub grade: Grade,
    pub last_answered: Option<QuestionId>,
}

impl StudentLectureState {
    pub fn new(student: StudentId, lecture: LectureId) -> Self {
        StudentLectureState {
            student,
            lecture,
            allocation: Vec::new(),
            history: AnswerHistory::new(),
            grade: Grade::ZERO,
            last_answered: None,
        }
    }

    /// Allocates a uniform random subset of `bank` of size
    /// `min(max_count, bank.len())`. Existing allocations are kept and only
    /// topped up from unallocated questions. Returns the newly added entries.
    pub fn allocate<R: Rng + CryptoRng + ?Sized>(
        &mut self,
        bank: &[QuestionId],
        max_count: usize,
        rng: &mut R,
    ) -> Result<Vec<AllocatedQuestion>, AllocationError> {
        if bank.is_empty() {
            return Err(AllocationError::EmptyLecture);
        }
        let target = max_count.min(bank.len());
        if self.allocation.len() >= target {
            return Ok(Vec::new());
        }
        let held: HashSet<&QuestionId> = self.allocation.iter().map(|a| &a.question).collect();
        let free: Vec<&QuestionId> = bank.iter().filter(|q| !held.contains(q)).collect();
        let want = (target - self.allocation.len()).min(free.len());
        let added: Vec<AllocatedQuestion> = index::sample(rng, free.len(), want)
            .into_iter()
            .map(|i| AllocatedQuestion {
                token: AllocationToken::generate(rng),
                question: free[i].clone(),
            })
            .collect();
        self.allocation.extend(added.iter().cloned());
        Ok(added)
    }

    pub fn token_for(&self, token: &AllocationToken) -> Option<&AllocatedQuestion> {
        self.allocation.iter().find(|a| &a.token == token)
    }
}

/// Samples a rank in `0..m` from a discrete Gaussian centred on
/// `(grade / 10) * (m - 1)` with spread `max(1, 0.15 m)`.
pub fn select_rank<R: Rng + ?Sized>(m: usize, grade: Grade, excluded: Option<usize>, rng: &mut R) -> usize {
    assert!(m > 0, "select_rank on empty allocation");
    if m == 1 {
        return 0;
    }
    let centre = (grade.value() / 10.0).clamp(0.0, 1.0) * (m - 1) as f64;
    let spread = (0.15 * m as f64).max(1.0);
    let weights = (0..m).map(|i| {
        if Some(i) == excluded {
            0.0
        } else {
            let d = i as f64 - centre;
            (-(d * d) / (2.0 * spread * spread)).exp()
        }
    });
    match WeightedIndex::new(weights) {
        Ok(dist) => dist.sample(rng),
        // every remaining weight underflowed; fall back to the nearest rank
        Err(_) => (0..m)
            .filter(|&i| Some(i) != excluded)
            .min_by(|&a, &b| {
                (a as f64 - centre)
                    .abs()
                    .total_cmp(&(b as f64 - centre).abs())
            })
            .unwrap(),
    }
}

/// Picks the next question: easy ones at low grades, harder ones as the
/// grade rises. The previous question is skipped when there is a choice.
pub fn select_next<'a, R, F>(
    state: &'a StudentLectureState,
    difficulty_of: F,
    rng: &mut R,
) -> Result<&'a AllocatedQuestion, AllocationError>
where
    R: Rng + ?Sized,
    F: Fn(&QuestionId) -> f64,
{
    let m = state.allocation.len();
    if m == 0 {
        return Err(AllocationError::EmptyAllocation);
    }
    let mut ranked: Vec<(f64, &AllocatedQuestion)> = state
        .allocation
        .iter()
        .map(|a| (difficulty_of(&a.question), a))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.question.cmp(&b.1.question)));
    let excluded = state
        .last_answered
        .as_ref()
        .and_then(|last| ranked.iter().position(|(_, a)| &a.question == last));
    let excluded = if m >= 2 { excluded } else { None };
    Ok(ranked[select_rank(m, state.grade, excluded, rng)].1)
}
