//! Grading-scheme comparison on simulated cohorts.
//!
//! Each rep draws a population of learners and guessers, runs every student
//! through every scheme with the same random stream, and scores how well the
//! final drill grade ranks students who truly mastered the material (final
//! mastery above a threshold) above those who did not.

use super::auc::auc;
use super::sim::{simulate_session, SimLecture, SimPersona};
use super::AnalyticsError;
use crate::grading::GradePolicy;
use crate::pacing::TimeoutPolicy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Scheme {
    pub name: String,
    pub grade_policy: GradePolicy,
    pub timeout_policy: TimeoutPolicy,
}

impl Scheme {
    pub fn taper_timeout() -> Self {
        Scheme {
            name: "taper+timeout".into(),
            grade_policy: GradePolicy::default(),
            timeout_policy: TimeoutPolicy::default(),
        }
    }

    pub fn taper_only() -> Self {
        Scheme {
            name: "taper".into(),
            grade_policy: GradePolicy::default(),
            timeout_policy: TimeoutPolicy::disabled(),
        }
    }

    pub fn fixed8() -> Self {
        Scheme {
            name: "fixed8".into(),
            grade_policy: GradePolicy::fixed_window(8),
            timeout_policy: TimeoutPolicy::disabled(),
        }
    }

    /// taper+timeout, taper only, fixed-8.
    pub fn standard() -> Vec<Scheme> {
        vec![Self::taper_timeout(), Self::taper_only(), Self::fixed8()]
    }
}

/// Cohort generator. Learner mastery is normal around `learner_theta`;
/// their time per unit difficulty is `base_seconds * exp(-speed_gain * theta0)`,
/// so stronger students are also quicker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PopulationSpec {
    pub students: usize,
    pub guesser_fraction: f64,
    pub learner_theta: (f64, f64),
    pub guesser_theta: (f64, f64),
    pub learn_rate: (f64, f64),
    pub base_seconds: f64,
    pub speed_gain: f64,
    pub mastery_threshold: f64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec {
            students: 500,
            guesser_fraction: 0.4,
            learner_theta: (0.3, 0.6),
            guesser_theta: (0.0, 0.4),
            learn_rate: (0.0, 0.01),
            base_seconds: 30.0,
            speed_gain: 1.0,
            mastery_threshold: 0.6,
        }
    }
}

impl PopulationSpec {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        let bad = |m: &str| Err(AnalyticsError::InvalidInput(m.into()));
        if self.students < 2 {
            return bad("need at least two students");
        }
        if !(0.0..=1.0).contains(&self.guesser_fraction) {
            return bad("guesser fraction must lie in [0, 1]");
        }
        if !(self.learner_theta.1 >= 0.0 && self.guesser_theta.1 >= 0.0) {
            return bad("mastery spread must be non-negative");
        }
        let (lo, hi) = self.learn_rate;
        if !(0.0 <= lo && lo <= hi && hi < 1.0) {
            return bad("learn rate range must satisfy 0 <= lo <= hi < 1");
        }
        if self.base_seconds.is_nan() || self.base_seconds <= 0.0 {
            return bad("base seconds must be positive");
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SimPersona {
        let guesser = rng.random_bool(self.guesser_fraction);
        let (mean, sd) = if guesser { self.guesser_theta } else { self.learner_theta };
        let theta0 = Normal::new(mean, sd).expect("valid normal").sample(rng).min(0.99);
        let (lo, hi) = self.learn_rate;
        let learn_rate = if hi > lo { rng.random_range(lo..hi) } else { lo };
        SimPersona {
            theta0,
            learn_rate,
            guesser,
            seconds_per_difficulty: self.base_seconds * (-self.speed_gain * theta0).exp(),
            ..SimPersona::default()
        }
    }
}

/// One simulated student under one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StudentRow {
    pub rep: usize,
    pub student: usize,
    pub scheme: String,
    pub guesser: bool,
    pub theta0: f64,
    pub final_theta: f64,
    pub mastered: bool,
    pub grade: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemeAuc {
    pub scheme: String,
    pub auc_mean: f64,
    /// Standard error of the mean across reps.
    pub auc_se: f64,
    pub auc_per_rep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemeComparison {
    pub schemes: Vec<SchemeAuc>,
    pub rows: Vec<StudentRow>,
}

impl SchemeComparison {
    pub fn get(&self, scheme: &str) -> Option<&SchemeAuc> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }
}

/// SplitMix64 finaliser; derives independent per-student streams.
pub(crate) fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut z = master
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `reps` cohorts through every scheme and reports per-scheme AUC of
/// final grade against mastery.
pub fn compare_schemes(
    population: &PopulationSpec,
    lecture: &SimLecture,
    schemes: &[Scheme],
    n_answers: usize,
    reps: usize,
    seed: u64,
) -> Result<SchemeComparison, AnalyticsError> {
    population.validate()?;
    if reps == 0 || n_answers == 0 || schemes.is_empty() {
        return Err(AnalyticsError::InvalidInput("reps, answers and schemes must be non-empty".into()));
    }
    if lecture.difficulties.is_empty() {
        return Err(AnalyticsError::InvalidInput("lecture has no questions".into()));
    }
    let mut per_scheme: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); schemes.len()];
    let mut rows = Vec::with_capacity(reps * population.students * schemes.len());

    for rep in 0..reps {
        let cohort: Vec<Vec<StudentRow>> = (0..population.students)
            .into_par_iter()
            .map(|student| {
                let mut prng = ChaCha20Rng::seed_from_u64(mix_seed(seed, rep as u64, 2 * student as u64));
                let persona = population.draw(&mut prng);
                let session_seed = mix_seed(seed, rep as u64, 2 * student as u64 + 1);
                schemes
                    .iter()
                    .map(|s| {
                        let r = simulate_session(
                            &persona,
                            lecture,
                            &s.grade_policy,
                            &s.timeout_policy,
                            n_answers,
                            session_seed,
                        );
                        StudentRow {
                            rep,
                            student,
                            scheme: s.name.clone(),
                            guesser: persona.guesser,
                            theta0: persona.theta0,
                            final_theta: r.theta,
                            mastered: r.theta >= population.mastery_threshold,
                            grade: r.grade.value(),
                        }
                    })
                    .collect()
            })
            .collect();
        for (si, _) in schemes.iter().enumerate() {
            let scores: Vec<(f64, bool)> = cohort.iter().map(|rs| (rs[si].grade, rs[si].mastered)).collect();
            per_scheme[si].push(auc(&scores)?);
        }
        for student_rows in cohort {
            rows.extend(student_rows);
        }
    }
    // group rows by scheme, then rep and student
    rows.sort_by(|a, b| {
        let ia = schemes.iter().position(|s| s.name == a.scheme);
        let ib = schemes.iter().position(|s| s.name == b.scheme);
        ia.cmp(&ib).then(a.rep.cmp(&b.rep)).then(a.student.cmp(&b.student))
    });

    let schemes = schemes
        .iter()
        .zip(per_scheme)
        .map(|(s, aucs)| {
            let (auc_mean, auc_se) = mean_and_se(&aucs);
            SchemeAuc {
                scheme: s.name.clone(),
                auc_mean,
                auc_se,
                auc_per_rep: aucs,
            }
        })
        .collect();
    Ok(SchemeComparison { schemes, rows })
}
