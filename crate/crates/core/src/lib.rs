//! Algorithm scheduling for runtime algorithm-selection scenarios.
//!
//! The pipeline loads ASlib-style scenarios, learns a feature subset and a
//! neighborhood size with greedy wrapper search, builds per-instance solver schedules
//! from the k nearest training instances and evaluates everything under repeated
//! nested cross-validation.

// negated float comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod arff;
pub mod comparison;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod preprocess;
pub mod report;
pub mod scenario;
pub mod seed;
pub mod sunny;
pub mod synthetic;
pub mod training;

pub use error::{Error, Result};
pub use metrics::{AggregateScores, FailureKind, SimulationOutcome};
pub use scenario::{load_scenario, Scenario, ScenarioParts};
pub use sunny::{Engine, Schedule, Slot, SunnyModel, SunnyParams};
pub use training::{LearnedModel, LearningMode, SplitMode, TrainingConfig};
