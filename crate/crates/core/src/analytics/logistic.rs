//! Two-parameter logistic regression by iteratively reweighted least squares.

use super::AnalyticsError;
use serde::{Deserialize, Serialize};

const STEP_TOLERANCE: f64 = 1e-8;
const MAX_ITERATIONS: usize = 100;
const SEPARATION_NORM: f64 = 50.0;

/// `P(pass | g) = 1 / (1 + exp(-(beta0 + beta1 * g)))`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogisticFit {
    pub beta0: f64,
    pub beta1: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl LogisticFit {
    pub fn probability(&self, g: f64) -> f64 {
        sigmoid(self.beta0 + self.beta1 * g)
    }

    /// Grade at which the fitted probability is one half.
    pub fn midpoint(&self) -> Option<f64> {
        (self.beta1 != 0.0).then(|| -self.beta0 / self.beta1)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Maximum-likelihood fit of pass/fail outcomes against grade.
pub fn fit_pass_probability(points: &[(f64, bool)]) -> Result<LogisticFit, AnalyticsError> {
    if points.len() < 2 {
        return Err(AnalyticsError::DegenerateInput("need at least two points".into()));
    }
    if points.iter().any(|(g, _)| !g.is_finite()) {
        return Err(AnalyticsError::DegenerateInput("non-finite grade".into()));
    }
    let passes = points.iter().filter(|(_, y)| *y).count();
    if passes == 0 || passes == points.len() {
        return Err(AnalyticsError::DegenerateInput("only one outcome class present".into()));
    }
    let first = points[0].0;
    if points.iter().all(|(g, _)| *g == first) {
        return Err(AnalyticsError::DegenerateInput("all grades identical".into()));
    }

    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    for iteration in 1..=MAX_ITERATIONS {
        // gradient X'(y - p) and information X'WX
        let (mut g0, mut g1) = (0.0, 0.0);
        let (mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0);
        for &(x, y) in points {
            let p = sigmoid(b0 + b1 * x);
            let r = y as u8 as f64 - p;
            let w = p * (1.0 - p);
            g0 += r;
            g1 += r * x;
            h00 += w;
            h01 += w * x;
            h11 += w * x * x;
        }
        let det = h00 * h11 - h01 * h01;
        if !(det.is_finite() && det > 0.0) {
            return Err(AnalyticsError::CompleteSeparation {
                beta0: b0,
                beta1: b1,
                iterations: iteration,
            });
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        b0 += d0;
        b1 += d1;
        if b0.hypot(b1) > SEPARATION_NORM {
            return Err(AnalyticsError::CompleteSeparation {
                beta0: b0,
                beta1: b1,
                iterations: iteration,
            });
        }
        if d0.abs().max(d1.abs()) < STEP_TOLERANCE {
            return Ok(LogisticFit {
                beta0: b0,
                beta1: b1,
                converged: true,
                iterations: iteration,
            });
        }
    }
    Ok(LogisticFit {
        beta0: b0,
        beta1: b1,
        converged: false,
        iterations: MAX_ITERATIONS,
    })
}
