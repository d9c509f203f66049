//! Learning a configuration on a prepared training set and persisting the result.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{LearningMode, TrainingConfig};
use super::data::prepare_inner;
use super::default_k;
use super::learn::{learn_f, learn_fk, learn_k, LearnOutcome, ScoringContext, ScoringOptions};
use crate::error::{Error, Result};
use crate::preprocess::{FeatureStats, FeatureTransform};
use crate::scenario::Scenario;
use crate::seed::derive_seed;
use crate::sunny::{backup_solver, Engine, Schedule, SunnyModel, SunnyParams};

/// A fitted scheduler together with how it was obtained.
#[derive(Debug, Clone)]
pub struct LearnedModel {
    pub scenario: String,
    pub mode: LearningMode,
    pub model: SunnyModel,
    pub seed: u64,
    /// Seed path this model descends from, e.g. `[repetition, fold]`.
    pub seed_lineage: Vec<u64>,
    /// Best validation score (negated mean PAR); `None` when nothing was learned.
    pub validation_score: Option<f64>,
}

impl LearnedModel {
    pub fn selected_features(&self) -> &[usize] {
        &self.model.params().selected_features
    }

    pub fn k(&self) -> usize {
        self.model.params().k
    }

    pub fn backup(&self) -> usize {
        self.model.params().backup
    }

    pub fn make_schedule(&self, scenario: &Scenario, instance: usize) -> Result<Schedule> {
        self.model.make_schedule(scenario, instance)
    }

    pub fn feature_names(&self, scenario: &Scenario) -> Vec<String> {
        self.selected_features()
            .iter()
            .map(|&f| scenario.feature_names()[f].clone())
            .collect()
    }

    pub fn to_document(&self, scenario: &Scenario) -> ModelDocument {
        let params = self.model.params();
        let transform = self.model.transform();
        ModelDocument {
            scenario: self.scenario.clone(),
            learning_mode: self.mode,
            features: self.feature_names(scenario),
            k: params.k,
            backup: scenario.algorithm_ids()[params.backup].clone(),
            engine: params.engine,
            schedule_limit: params.schedule_limit,
            seed: self.seed,
            seed_lineage: self.seed_lineage.clone(),
            training_instances: self
                .model
                .training()
                .iter()
                .map(|&i| scenario.instance_ids()[i].clone())
                .collect(),
            transform: transform
                .kept_features()
                .iter()
                .zip(transform.stats())
                .map(|(&f, s)| TransformRecord {
                    feature: scenario.feature_names()[f].clone(),
                    min: s.min,
                    max: s.max,
                    median: s.median,
                })
                .collect(),
            validation_score: self.validation_score,
        }
    }

    /// Rebuilds a model against `scenario`, which must contain every training instance
    /// and every feature the document names.
    pub fn from_document(doc: &ModelDocument, scenario: &Scenario) -> Result<Self> {
        let feature = |name: &String| {
            scenario
                .feature_index(name)
                .ok_or_else(|| Error::UnknownFeature(name.clone()))
        };
        let mut records: Vec<(usize, FeatureStats)> = doc
            .transform
            .iter()
            .map(|r| {
                Ok((
                    feature(&r.feature)?,
                    FeatureStats {
                        min: r.min,
                        max: r.max,
                        median: r.median,
                    },
                ))
            })
            .collect::<Result<_>>()?;
        records.sort_by_key(|(f, _)| *f);
        let (kept, stats) = records.into_iter().unzip();
        let transform = FeatureTransform::from_parts(kept, stats)?;
        let selected_features = doc
            .features
            .iter()
            .map(feature)
            .collect::<Result<Vec<_>>>()?;
        let training = doc
            .training_instances
            .iter()
            .map(|id| {
                scenario
                    .instance_index(id)
                    .ok_or_else(|| Error::UnknownInstance(id.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let backup = scenario
            .algorithm_index(&doc.backup)
            .ok_or_else(|| Error::UnknownAlgorithm(doc.backup.clone()))?;
        let params = SunnyParams {
            k: doc.k,
            selected_features,
            backup,
            schedule_limit: doc.schedule_limit,
            engine: doc.engine,
        };
        Ok(LearnedModel {
            scenario: doc.scenario.clone(),
            mode: doc.learning_mode,
            model: SunnyModel::with_transform(scenario, &training, transform, params)?,
            seed: doc.seed,
            seed_lineage: doc.seed_lineage.clone(),
            validation_score: doc.validation_score,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub feature: String,
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

/// JSON form of a [`LearnedModel`]; everything is referenced by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub scenario: String,
    pub learning_mode: LearningMode,
    pub features: Vec<String>,
    pub k: usize,
    pub backup: String,
    pub engine: Engine,
    pub schedule_limit: usize,
    pub seed: u64,
    pub seed_lineage: Vec<u64>,
    pub training_instances: Vec<String>,
    pub transform: Vec<TransformRecord>,
    pub validation_score: Option<f64>,
}

impl ModelDocument {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One configuration learned on an inner training set and scored on its validation fold.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub validation_fold: usize,
    pub outcome: LearnOutcome,
    /// Negated mean PAR of the learned configuration on the validation fold.
    pub validation_score: f64,
    /// Configurations scored while learning.
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LearnedModel,
    pub candidates: Vec<Candidate>,
    /// Whether any inner learning run hit the deadline.
    pub timed_out: bool,
}

/// Learns on `train` (scored leave-one-out) and assesses the result on `validation`.
fn learn_on(
    scenario: &Scenario,
    train: &[usize],
    validation: &[usize],
    config: &TrainingConfig,
    k_fixed: usize,
    deadline: Option<Instant>,
) -> Result<(LearnOutcome, f64, usize)> {
    let options = ScoringOptions {
        engine: config.engine_train,
        schedule_limit: config.schedule_limit,
        penalty: config.penalty,
        charge_feature_cost: config.charge_feature_cost,
    };
    let ctx = ScoringContext::leave_one_out(scenario, train, options)?;
    let mut outcome = match config.learning_mode {
        LearningMode::Fk => learn_fk(&ctx, config.k_max, config.feature_limit, deadline)?,
        LearningMode::F => learn_f(&ctx, k_fixed, config.feature_limit, deadline)?,
        LearningMode::K => learn_k(&ctx, config.k_max)?,
        LearningMode::None => unreachable!("nothing to learn"),
    };
    if outcome.features.is_empty() {
        // deadline hit before the first feature was accepted
        outcome.features = ctx.pool().to_vec();
        outcome.k = k_fixed;
    }
    let holdout = ScoringContext::new(scenario, train, validation, options)?;
    let validation_score = holdout.get_score(&outcome.features, outcome.k)?;
    Ok((outcome, validation_score, ctx.calls()))
}

/// Learns a configuration on every inner split of `prepared`, keeps the one with the
/// best validation score (ties to the earlier fold) and fits it on all of `prepared`.
pub fn learn_and_fit(
    scenario: &Scenario,
    prepared: &[usize],
    inner: &[Vec<usize>],
    config: &TrainingConfig,
    seed_lineage: &[u64],
    deadline: Option<Instant>,
) -> Result<TrainOutcome> {
    if prepared.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let transform = FeatureTransform::fit(scenario, prepared)?;
    let backup = backup_solver(scenario, prepared, config.penalty)?;
    let all_features = transform.kept_features().to_vec();
    let fallback_k = default_k(prepared.len());

    let mut candidates = Vec::new();
    let mut timed_out = false;
    let (features, k, validation_score) = if config.learning_mode == LearningMode::None {
        (all_features, fallback_k, None)
    } else {
        let runs: Vec<Result<Candidate>> = inner
            .par_iter()
            .enumerate()
            .map(|(j, validation)| {
                let train: Vec<usize> = inner
                    .iter()
                    .enumerate()
                    .filter(|&(other, _)| other != j)
                    .flat_map(|(_, fold)| fold.iter().copied())
                    .collect();
                let (outcome, validation_score, evaluations) =
                    learn_on(scenario, &train, validation, config, fallback_k, deadline)?;
                Ok(Candidate {
                    validation_fold: j,
                    outcome,
                    validation_score,
                    evaluations,
                })
            })
            .collect();
        for run in runs {
            match run {
                Ok(c) => candidates.push(c),
                // a validation split whose training part has no usable features is skipped
                Err(Error::NoInformativeFeatures) => {}
                Err(e) => return Err(e),
            }
        }
        timed_out = candidates.iter().any(|c| c.outcome.timed_out);
        let mut best: Option<&Candidate> = None;
        for c in &candidates {
            if best.is_none_or(|b| c.validation_score > b.validation_score) {
                best = Some(c);
            }
        }
        match best {
            Some(b) => {
                // features dropped as constant on `prepared` cannot be scaled
                let kept: Vec<usize> = b
                    .outcome
                    .features
                    .iter()
                    .copied()
                    .filter(|&f| transform.column_of(f).is_some())
                    .collect();
                if kept.is_empty() {
                    (all_features, b.outcome.k, Some(b.validation_score))
                } else {
                    (kept, b.outcome.k, Some(b.validation_score))
                }
            }
            None => (all_features, fallback_k, None),
        }
    };

    let params = SunnyParams {
        k: k.min(prepared.len()).max(1),
        selected_features: features,
        backup,
        schedule_limit: config.schedule_limit,
        engine: config.engine_test,
    };
    let model = SunnyModel::with_transform(scenario, prepared, transform, params)?;
    Ok(TrainOutcome {
        model: LearnedModel {
            scenario: scenario.name().to_string(),
            mode: config.learning_mode,
            model,
            seed: config.seed,
            seed_lineage: seed_lineage.to_vec(),
            validation_score,
        },
        candidates,
        timed_out,
    })
}

/// Prepares `instances`, splits them into validation folds and learns a model on them
/// under `config`, starting the time cap now.
pub fn train_model(
    scenario: &Scenario,
    instances: &[usize],
    config: &TrainingConfig,
) -> Result<TrainOutcome> {
    let seed = derive_seed(config.seed, &[]);
    let (prepared, inner) = prepare_inner(scenario, instances, config, seed)?;
    let deadline = Instant::now().checked_add(Duration::from_secs_f64(config.time_cap.min(1e9)));
    learn_and_fit(scenario, &prepared, &inner, config, &[], deadline)
}
