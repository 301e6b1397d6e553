//! Per-question answer time limit as a function of the current grade.
//!
//! The limit dips to `t_min` at grade `g_min` and relaxes towards `t_max` on
//! either side, following a Gaussian dip of the given width. Beginners and
//! strong students are barely constrained; intermediate grades are not.

use crate::grading::{Grade, PolicyError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct TimeoutPolicy {
    pub enabled: bool,
    pub t_min: f64,
    pub t_max: f64,
    pub g_min: f64,
    pub width: f64,
}

impl Default for TimeoutPolicy {
    fn default() -> Self {
        TimeoutPolicy {
            enabled: true,
            t_min: 15.0,
            t_max: 180.0,
            g_min: 6.0,
            width: 2.0,
        }
    }
}

impl TimeoutPolicy {
    pub fn disabled() -> Self {
        TimeoutPolicy {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn constant(seconds: f64) -> Self {
        TimeoutPolicy {
            enabled: true,
            t_min: seconds,
            t_max: seconds,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if !(self.t_min.is_finite() && self.t_min > 0.0) {
            return Err(PolicyError::Timeout("tMin must be positive"));
        }
        if !(self.t_max.is_finite() && self.t_max >= self.t_min) {
            return Err(PolicyError::Timeout("tMax must be at least tMin"));
        }
        if !(0.0..=10.0).contains(&self.g_min) {
            return Err(PolicyError::Timeout("gMin must lie in [0, 10]"));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(PolicyError::Timeout("width must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Timeout {
    Seconds(f64),
    Unlimited,
}

impl Timeout {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Timeout::Seconds(s) => Some(s),
            Timeout::Unlimited => None,
        }
    }

    /// Whether a response of `elapsed` seconds fits, with `slack` seconds of grace.
    pub fn allows(self, elapsed: f64, slack: f64) -> bool {
        match self {
            Timeout::Seconds(s) => elapsed <= s + slack,
            Timeout::Unlimited => true,
        }
    }
}

pub fn timeout_seconds(g: Grade, p: &TimeoutPolicy) -> Timeout {
    if !p.enabled {
        return Timeout::Unlimited;
    }
    let d = g.value() - p.g_min;
    // 1 - exp(-x), exact zero at the minimum
    let rise = -(-(d * d) / (2.0 * p.width * p.width)).exp_m1();
    Timeout::Seconds(p.t_min + (p.t_max - p.t_min) * rise)
}
