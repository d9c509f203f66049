//! Wrapper learning of the feature subset and the neighborhood size.
//!
//! A configuration `(features, k)` is scored by scheduling every evaluated instance
//! from its k nearest training instances and simulating the schedules; the score is
//! the negated mean PAR, so larger is better. Learning evaluates the training set on
//! itself, leaving each instance out of its own neighborhood; a held-out set can be
//! scored the same way.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::preprocess::FeatureTransform;
use crate::scenario::Scenario;
use crate::sunny::{self, backup_solver, rank_by_distance, Engine};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringOptions {
    pub engine: Engine,
    pub schedule_limit: usize,
    pub penalty: f64,
    pub charge_feature_cost: bool,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        ScoringOptions {
            engine: Engine::Greedy,
            schedule_limit: 3,
            penalty: crate::metrics::PAR10,
            charge_feature_cost: true,
        }
    }
}

/// Inner-training and validation data prepared for repeated configuration scoring.
#[derive(Debug)]
pub struct ScoringContext<'a> {
    scenario: &'a Scenario,
    train: Vec<usize>,
    validation: Vec<usize>,
    transform: FeatureTransform,
    train_rows: Vec<Vec<f64>>,
    validation_rows: Vec<Vec<f64>>,
    backup: usize,
    options: ScoringOptions,
    /// Validation position `v` is training position `v` and never its own neighbor.
    leave_one_out: bool,
    calls: AtomicUsize,
}

/// Per validation instance, training positions sorted by distance (closest first).
pub struct Ranking(Vec<Vec<usize>>);

impl<'a> ScoringContext<'a> {
    /// Fits the feature transform and the backup solver on `train`.
    pub fn new(
        scenario: &'a Scenario,
        train: &[usize],
        validation: &[usize],
        options: ScoringOptions,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let transform = FeatureTransform::fit(scenario, train)?;
        let train_rows = train
            .iter()
            .map(|&i| transform.transform(scenario, i))
            .collect();
        let validation_rows = validation
            .iter()
            .map(|&i| transform.transform(scenario, i))
            .collect();
        let backup = backup_solver(scenario, train, options.penalty)?;
        Ok(ScoringContext {
            scenario,
            train: train.to_vec(),
            validation: validation.to_vec(),
            transform,
            train_rows,
            validation_rows,
            backup,
            options,
            leave_one_out: false,
            calls: AtomicUsize::new(0),
        })
    }

    /// Scores configurations on `train` itself: every instance is scheduled from the
    /// other training instances.
    pub fn leave_one_out(
        scenario: &'a Scenario,
        train: &[usize],
        options: ScoringOptions,
    ) -> Result<Self> {
        if train.len() < 2 {
            return Err(Error::InvalidArgument(
                "leave-one-out scoring needs at least two instances".into(),
            ));
        }
        let mut ctx = Self::new(scenario, train, train, options)?;
        ctx.leave_one_out = true;
        Ok(ctx)
    }

    /// Candidate features: every feature that is not constant on the training data.
    pub fn pool(&self) -> &[usize] {
        self.transform.kept_features()
    }

    /// Number of training instances a neighborhood can draw from.
    pub fn train_len(&self) -> usize {
        self.train.len() - usize::from(self.leave_one_out)
    }

    /// Number of configurations scored so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    fn columns(&self, features: &[usize]) -> Result<Vec<usize>> {
        features
            .iter()
            .map(|&f| {
                self.transform
                    .column_of(f)
                    .ok_or_else(|| Error::UnknownFeature(self.scenario.feature_names()[f].clone()))
            })
            .collect()
    }

    /// Orders the training set by distance for every validation instance, using the
    /// given original features, keeping the first `max_k` positions.
    pub fn rank(&self, features: &[usize], max_k: usize) -> Result<Ranking> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("no features selected".into()));
        }
        let cols = self.columns(features)?;
        let project = |row: &Vec<f64>| cols.iter().map(|&c| row[c]).collect::<Vec<f64>>();
        let train: Vec<Vec<f64>> = self.train_rows.iter().map(project).collect();
        Ok(Ranking(
            self.validation_rows
                .iter()
                .enumerate()
                .map(|(v, row)| {
                    let query = project(row);
                    rank_by_distance(&query, &train, max_k + 1)
                        .into_iter()
                        .map(|(_, p)| p)
                        .filter(|&p| !(self.leave_one_out && p == v))
                        .take(max_k)
                        .collect()
                })
                .collect(),
        ))
    }

    /// Scores neighborhood size `k` on a precomputed ranking.
    pub fn score_ranked(&self, ranking: &Ranking, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        if self.validation.is_empty() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        let mut neighbors = Vec::with_capacity(k);
        for (v, &instance) in self.validation.iter().enumerate() {
            neighbors.clear();
            neighbors.extend(ranking.0[v].iter().take(k).map(|&p| self.train[p]));
            let schedule = sunny::schedule_neighborhood(
                self.scenario,
                &neighbors,
                self.options.engine,
                self.options.schedule_limit,
                self.backup,
            )?;
            total += sunny::simulated_par(
                &schedule,
                self.scenario,
                instance,
                self.options.penalty,
                self.options.charge_feature_cost,
            );
        }
        Ok(-total / self.validation.len() as f64)
    }

    /// Score of one configuration: the negated mean validation PAR.
    pub fn get_score(&self, features: &[usize], k: usize) -> Result<f64> {
        let ranking = self.rank(features, k)?;
        self.score_ranked(&ranking, k)
    }
}

/// Result of a learning procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutcome {
    /// Selected original feature indices, in selection order.
    pub features: Vec<usize>,
    pub k: usize,
    pub score: f64,
    /// Best score after each accepted feature.
    pub trace: Vec<f64>,
    pub timed_out: bool,
}

fn past(deadline: Option<Instant>) -> bool {
    deadline.is_some_and(|d| Instant::now() >= d)
}

/// Greedy forward selection; for every candidate feature the whole `k_range` is
/// scanned. Ties keep the first candidate (pool order, then smaller k).
fn forward_selection(
    ctx: &ScoringContext<'_>,
    max_features: usize,
    k_range: std::ops::RangeInclusive<usize>,
    deadline: Option<Instant>,
) -> Result<LearnOutcome> {
    let mut pool: Vec<usize> = ctx.pool().to_vec();
    let mut best_features: Vec<usize> = Vec::new();
    let mut best_k = *k_range.start();
    let mut best_score = f64::NEG_INFINITY;
    let mut trace = Vec::new();
    let mut timed_out = false;
    let max_k = *k_range.end();

    while best_features.len() < max_features && !pool.is_empty() {
        let scans: Vec<Option<(f64, usize)>> = pool
            .par_iter()
            .map(|&f| -> Result<Option<(f64, usize)>> {
                if past(deadline) {
                    return Ok(None);
                }
                let mut candidate = best_features.clone();
                candidate.push(f);
                let ranking = ctx.rank(&candidate, max_k)?;
                let mut best: Option<(f64, usize)> = None;
                for k in k_range.clone() {
                    let score = ctx.score_ranked(&ranking, k)?;
                    if best.is_none_or(|(s, _)| score > s) {
                        best = Some((score, k));
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        if scans.iter().any(Option::is_none) {
            timed_out = true;
            break;
        }
        let mut current: Option<(f64, usize, usize)> = None;
        for (pos, scan) in scans.iter().enumerate() {
            let (score, k) = scan.expect("checked above");
            if current.is_none_or(|(s, _, _)| score > s) {
                current = Some((score, pos, k));
            }
        }
        let Some((score, pos, k)) = current else {
            break;
        };
        if score <= best_score {
            break;
        }
        best_score = score;
        best_features.push(pool.remove(pos));
        best_k = k;
        trace.push(score);
        if past(deadline) {
            timed_out = true;
            break;
        }
    }
    Ok(LearnOutcome {
        features: best_features,
        k: best_k,
        score: best_score,
        trace,
        timed_out,
    })
}

/// Learns features and k together: each round adds the feature whose best k gives the
/// highest score, and stops when no addition improves on the previous round, after
/// `max_features` features, or at the deadline.
pub fn learn_fk(
    ctx: &ScoringContext<'_>,
    max_k: usize,
    max_features: usize,
    deadline: Option<Instant>,
) -> Result<LearnOutcome> {
    let max_k = max_k.min(ctx.train_len()).max(1);
    forward_selection(ctx, max_features, 1..=max_k, deadline)
}

/// Learns features only, with k fixed.
pub fn learn_f(
    ctx: &ScoringContext<'_>,
    k: usize,
    max_features: usize,
    deadline: Option<Instant>,
) -> Result<LearnOutcome> {
    forward_selection(ctx, max_features, k.max(1)..=k.max(1), deadline)
}

/// Learns k only, with every feature; ties go to the smaller k.
pub fn learn_k(ctx: &ScoringContext<'_>, max_k: usize) -> Result<LearnOutcome> {
    let max_k = max_k.min(ctx.train_len()).max(1);
    let features = ctx.pool().to_vec();
    let ranking = ctx.rank(&features, max_k)?;
    let mut best = (f64::NEG_INFINITY, 1);
    for k in 1..=max_k {
        let score = ctx.score_ranked(&ranking, k)?;
        if score > best.0 {
            best = (score, k);
        }
    }
    Ok(LearnOutcome {
        features,
        k: best.1,
        score: best.0,
        trace: vec![best.0],
        timed_out: false,
    })
}
