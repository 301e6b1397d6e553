//! Lecture grades from an answer history.
//!
//! The tapered scheme averages the most recent answers over a window that
//! starts at 8, grows as `floor(n / 2)` once more than 16 answers have been
//! given, and is capped at 30. The legacy scheme always uses the last 8.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnswerOutcome {
    pub correct: bool,
    pub timed_out: bool,
    pub time_taken: f64,
}

impl AnswerOutcome {
    /// A timed-out answer always counts as incorrect.
    pub fn new(correct: bool, timed_out: bool, time_taken: f64) -> Self {
        AnswerOutcome {
            correct: correct && !timed_out,
            timed_out,
            time_taken: time_taken.max(0.0),
        }
    }

    pub fn answered(correct: bool) -> Self {
        Self::new(correct, false, 0.0)
    }
}

/// Ordered answer log, oldest first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnswerHistory {
    outcomes: Vec<AnswerOutcome>,
}

impl AnswerHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, outcome: AnswerOutcome) {
        self.outcomes.push(outcome);
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[AnswerOutcome] {
        &self.outcomes
    }
}

impl FromIterator<AnswerOutcome> for AnswerHistory {
    fn from_iter<I: IntoIterator<Item = AnswerOutcome>>(iter: I) -> Self {
        AnswerHistory {
            outcomes: iter.into_iter().collect(),
        }
    }
}

impl From<Vec<AnswerOutcome>> for AnswerHistory {
    fn from(outcomes: Vec<AnswerOutcome>) -> Self {
        AnswerHistory { outcomes }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("invalid grade policy: {0}")]
    Grade(&'static str),
    #[error("invalid timeout policy: {0}")]
    Timeout(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GradePolicy {
    pub base_window: usize,
    pub growth_threshold: usize,
    pub growth_divisor: f64,
    pub max_window: usize,
    pub scale: f64,
    pub last_answer_weight: f64,
}

impl Default for GradePolicy {
    fn default() -> Self {
        GradePolicy {
            base_window: 8,
            growth_threshold: 16,
            growth_divisor: 2.0,
            max_window: 30,
            scale: 10.0,
            last_answer_weight: 1.0,
        }
    }
}

impl GradePolicy {
    /// The pre-taper scheme: a fixed window of the last `len` answers.
    pub fn fixed_window(len: usize) -> Self {
        GradePolicy {
            base_window: len,
            growth_threshold: len,
            max_window: len,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.base_window > self.max_window {
            return Err(PolicyError::Grade("baseWindow must not exceed maxWindow"));
        }
        if self.growth_threshold < self.base_window {
            return Err(PolicyError::Grade("growthThreshold must be at least baseWindow"));
        }
        if !(self.growth_divisor.is_finite() && self.growth_divisor > 0.0) {
            return Err(PolicyError::Grade("growthDivisor must be positive"));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(PolicyError::Grade("scale must be positive"));
        }
        if !(self.last_answer_weight.is_finite() && self.last_answer_weight >= 1.0) {
            return Err(PolicyError::Grade("lastAnswerWeight must be at least 1"));
        }
        Ok(())
    }
}

/// Lecture grade on `[0, scale]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grade(f64);

impl Grade {
    pub const ZERO: Grade = Grade(0.0);

    pub fn new(value: f64) -> Self {
        Grade(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Number of most recent answers that count towards the grade after `n` answers.
pub fn window_size(n: usize, p: &GradePolicy) -> usize {
    if n < p.base_window {
        n
    } else if n <= p.growth_threshold {
        p.base_window
    } else {
        let grown = (n as f64 / p.growth_divisor).floor() as usize;
        grown.max(p.base_window).min(p.max_window)
    }
}

fn windowed_mean(tail: &[AnswerOutcome], last_weight: f64) -> f64 {
    let Some((last, rest)) = tail.split_last() else {
        return 0.0;
    };
    let rest_correct = rest.iter().filter(|o| o.correct).count() as f64;
    let last_correct = if last.correct { last_weight } else { 0.0 };
    (rest_correct + last_correct) / (rest.len() as f64 + last_weight)
}

pub fn compute_grade(h: &AnswerHistory, p: &GradePolicy) -> Grade {
    let n = h.len();
    let w = window_size(n, p);
    if w == 0 {
        return Grade::ZERO;
    }
    let tail = &h.outcomes[n - w..];
    Grade(p.scale * windowed_mean(tail, p.last_answer_weight))
}

/// Mean of the last `min(n, 8)` answers on a 0-10 scale.
pub fn compute_grade_legacy(h: &AnswerHistory) -> Grade {
    let n = h.len();
    let w = n.min(8);
    if w == 0 {
        return Grade::ZERO;
    }
    let correct = h.outcomes[n - w..].iter().filter(|o| o.correct).count();
    Grade(10.0 * (correct as f64 / w as f64))
}

/// Incrementally maintained grade: O(1) per appended answer via prefix
/// counts of correct answers.
#[derive(Debug, Clone)]
pub struct GradeTracker {
    policy: GradePolicy,
    prefix: Vec<u32>,
    last_correct: bool,
}

impl GradeTracker {
    pub fn new(policy: GradePolicy) -> Self {
        GradeTracker {
            policy,
            prefix: vec![0],
            last_correct: false,
        }
    }

    pub fn push(&mut self, correct: bool) -> Grade {
        let prev = *self.prefix.last().unwrap();
        self.prefix.push(prev + correct as u32);
        self.last_correct = correct;
        self.grade()
    }

    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn grade(&self) -> Grade {
        let n = self.len();
        let w = window_size(n, &self.policy);
        if w == 0 {
            return Grade::ZERO;
        }
        let in_window = self.prefix[n] - self.prefix[n - w];
        let last = self.last_correct as u32;
        let lw = self.policy.last_answer_weight;
        let rest = (in_window - last) as f64;
        let last_part = if self.last_correct { lw } else { 0.0 };
        Grade(self.policy.scale * ((rest + last_part) / ((w - 1) as f64 + lw)))
    }
}
