//! Simulation and analysis of grading schemes.

mod auc;
mod compare;
mod logistic;
pub mod report;
mod sim;

pub use auc::auc;
pub use compare::{compare_schemes, mean_and_se, PopulationSpec, Scheme, SchemeAuc, SchemeComparison, StudentRow};
pub use logistic::{fit_pass_probability, LogisticFit};
pub use sim::{simulate_session, SessionResult, SimLecture, SimPersona};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("complete separation after {iterations} iterations (beta0={beta0:.3}, beta1={beta1:.3})")]
    CompleteSeparation { beta0: f64, beta1: f64, iterations: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
