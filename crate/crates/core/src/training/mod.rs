//! Data preparation, fold construction, feature/k learning and the repeated nested
//! cross-validation driver.

mod config;
pub mod cv;
pub mod data;
pub mod learn;
mod model;

pub use config::{LearningMode, SplitMode, TrainingConfig};
pub use cv::{evaluate_model, run_nested_cv, Evaluation, ExperimentReport, FoldReport, FoldStatus};
pub use data::{prepare_training_set, split_folds, FoldPlan, OuterFold};
pub use learn::{learn_f, learn_fk, learn_k, LearnOutcome, ScoringContext, ScoringOptions};
pub use model::{learn_and_fit, train_model, Candidate, LearnedModel, ModelDocument, TrainOutcome};

/// Default neighborhood size: the square root of the training-set size, rounded.
pub fn default_k(n_training: usize) -> usize {
    ((n_training as f64).sqrt().round() as usize).max(1)
}

#[cfg(test)]
mod tests {
    #[test]
    fn default_k_rounds_to_nearest() {
        assert_eq!(super::default_k(0), 1);
        assert_eq!(super::default_k(1), 1);
        assert_eq!(super::default_k(66), 8);
        assert_eq!(super::default_k(72), 8);
        assert_eq!(super::default_k(73), 9);
        assert_eq!(super::default_k(700), 26);
    }
}
