//! Simulated students working through a drill session.

use crate::allocation::{select_next, StudentLectureState, DEFAULT_MAX_ALLOCATION};
use crate::content::QuestionId;
use crate::grading::{AnswerHistory, AnswerOutcome, Grade, GradePolicy, GradeTracker};
use crate::pacing::{timeout_seconds, Timeout, TimeoutPolicy};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A simulated student.
///
/// Non-guessers answer correctly with probability
/// `1 / (1 + exp(-discrimination * (theta - d)))` and take a lognormal
/// time whose median is `seconds_per_difficulty` times the question's
/// normalised difficulty. Guessers pick uniformly among the choices and
/// answer quickly. Mastery moves as `theta += learn_rate * (1 - theta)`
/// after every answer while below 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimPersona {
    pub theta0: f64,
    pub learn_rate: f64,
    pub guesser: bool,
    pub discrimination: f64,
    pub seconds_per_difficulty: f64,
    pub time_sigma: f64,
    pub guess_seconds: (f64, f64),
}

impl Default for SimPersona {
    fn default() -> Self {
        SimPersona {
            theta0: 0.0,
            learn_rate: 0.0,
            guesser: false,
            discrimination: 1.7,
            seconds_per_difficulty: 20.0,
            time_sigma: 0.5,
            guess_seconds: (2.0, 8.0),
        }
    }
}

impl SimPersona {
    pub fn learner(theta0: f64, learn_rate: f64) -> Self {
        SimPersona {
            theta0,
            learn_rate,
            ..Self::default()
        }
    }

    pub fn guesser() -> Self {
        SimPersona {
            guesser: true,
            ..Self::default()
        }
    }

    pub fn accuracy(&self, theta: f64, difficulty: f64) -> f64 {
        1.0 / (1.0 + (-self.discrimination * (theta - difficulty)).exp())
    }

    pub fn update_mastery(&self, theta: f64) -> f64 {
        if theta < 1.0 {
            (theta + self.learn_rate * (1.0 - theta)).min(1.0)
        } else {
            theta
        }
    }
}

/// A lecture's questions as seen by the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimLecture {
    /// Latent difficulty of each question, on the mastery scale.
    pub difficulties: Vec<f64>,
    pub choices: usize,
}

impl SimLecture {
    /// `n` questions with difficulties evenly spread over `[lo, hi]`.
    pub fn spread(n: usize, lo: f64, hi: f64, choices: usize) -> Self {
        let difficulties = (0..n)
            .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect();
        SimLecture { difficulties, choices }
    }

    fn normalised(&self, d: f64) -> f64 {
        let lo = self.difficulties.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.difficulties.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            ((d - lo) / (hi - lo)).max(0.05)
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub history: AnswerHistory,
    pub grade: Grade,
    pub theta: f64,
    /// Grade after each answer.
    pub trajectory: Vec<Grade>,
}

impl SessionResult {
    /// Highest grade reached once at least `from` answers had been given.
    pub fn max_grade_from(&self, from: usize) -> Grade {
        self.trajectory
            .iter()
            .skip(from.saturating_sub(1))
            .copied()
            .fold(Grade::ZERO, |a, b| if b.value() > a.value() { b } else { a })
    }
}

/// Runs one drill session; fully determined by `seed`.
pub fn simulate_session(
    persona: &SimPersona,
    lecture: &SimLecture,
    grade_policy: &GradePolicy,
    timeout_policy: &TimeoutPolicy,
    n_answers: usize,
    seed: u64,
) -> SessionResult {
    assert!(n_answers >= 1, "a session needs at least one answer");
    assert!(!lecture.difficulties.is_empty(), "lecture has no questions");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let ids: Vec<QuestionId> = (0..lecture.difficulties.len())
        .map(|i| QuestionId::from(format!("sim{i:05}").as_str()))
        .collect();
    let by_id: HashMap<&QuestionId, f64> = ids.iter().zip(lecture.difficulties.iter().copied()).collect();

    let mut state = StudentLectureState::new("sim".into(), "sim".into());
    state
        .allocate(&ids, DEFAULT_MAX_ALLOCATION, &mut rng)
        .expect("non-empty lecture");

    let mut tracker = GradeTracker::new(*grade_policy);
    let mut theta = persona.theta0;
    let mut trajectory = Vec::with_capacity(n_answers);
    let k = lecture.choices.max(1);

    for _ in 0..n_answers {
        let q = select_next(&state, |q| by_id[q], &mut rng)
            .expect("allocation is non-empty")
            .question
            .clone();
        let d = by_id[&q];
        let limit = timeout_seconds(state.grade, timeout_policy);
        let (correct, elapsed) = if persona.guesser {
            let (lo, hi) = persona.guess_seconds;
            (rng.random_range(0..k) == 0, rng.random_range(lo..=hi))
        } else {
            let correct = rng.random_bool(persona.accuracy(theta, d).clamp(0.0, 1.0));
            let median = persona.seconds_per_difficulty * lecture.normalised(d);
            let t = LogNormal::new(median.ln(), persona.time_sigma)
                .expect("finite lognormal parameters")
                .sample(&mut rng);
            (correct, t)
        };
        let timed_out = !limit.allows(elapsed, 0.0);
        let time_taken = match limit {
            Timeout::Seconds(s) if timed_out => s,
            _ => elapsed,
        };
        let outcome = AnswerOutcome::new(correct, timed_out, time_taken);
        state.grade = tracker.push(outcome.correct);
        state.history.push(outcome);
        state.last_answered = Some(q);
        trajectory.push(state.grade);
        theta = persona.update_mastery(theta);
    }

    SessionResult {
        grade: state.grade,
        history: state.history,
        theta,
        trajectory,
    }
}
