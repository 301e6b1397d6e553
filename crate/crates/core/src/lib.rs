//! Adaptive drilling engine.
//!
//! - [`content`]: question bank model, TeX importer, choice shuffling
//! - [`grading`]: tapered and fixed-window lecture grades
//! - [`pacing`]: grade-dependent answer time limits
//! - [`allocation`]: per-student allocations and difficulty-matched selection
//! - [`sync`]: the offline-tolerant answer sync service and its HTTP API
//! - [`analytics`]: student simulation, logistic fits and scheme comparison
//! - [`cli`]: the `tutorweb` command line

pub mod allocation;
pub mod content;
pub mod grading;
pub mod pacing;
pub mod sync;
pub mod analytics;
pub mod cli;
