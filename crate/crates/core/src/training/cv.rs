//! Repeated nested cross-validation and held-out evaluation.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::TrainingConfig;
use super::data::FoldPlan;
use super::model::{learn_and_fit, LearnedModel};
use crate::analysis::{
    classify_unsolved, jaccard_neighborhoods, scenario_indicators, schedule_size_stats,
    ScenarioIndicators, ScheduleSizeStats, UnsolvedBreakdown,
};
use crate::error::Result;
use crate::metrics::{aggregate, simulate_schedule, AggregateScores, SimulationOutcome};
use crate::scenario::Scenario;
use crate::sunny::Schedule;

/// Schedules and simulation outcomes of a model over some instances.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub schedules: Vec<Schedule>,
    pub outcomes: Vec<SimulationOutcome>,
    pub scores: AggregateScores,
}

/// Schedules every instance with `model` and scores the simulated outcomes.
pub fn evaluate_model(
    scenario: &Scenario,
    model: &LearnedModel,
    instances: &[usize],
    penalty: f64,
    charge_feature_cost: bool,
) -> Result<Evaluation> {
    let runs: Vec<(Schedule, SimulationOutcome)> = instances
        .par_iter()
        .map(|&i| {
            let schedule = model.make_schedule(scenario, i)?;
            let outcome = simulate_schedule(&schedule, scenario, i, charge_feature_cost)?;
            Ok((schedule, outcome))
        })
        .collect::<Result<_>>()?;
    let (schedules, outcomes): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let scores = aggregate(scenario, &outcomes, penalty);
    Ok(Evaluation {
        schedules,
        outcomes,
        scores,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldStatus {
    Ok,
    /// Training exceeded the time cap; the fold counts as closed gap 0.
    Timeout,
}

impl FoldStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FoldStatus::Ok => "ok",
            FoldStatus::Timeout => "timeout",
        }
    }
}

/// Result of one outer fold of one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub repetition: usize,
    pub fold: usize,
    pub status: FoldStatus,
    /// `None` when the SBS ties the VBS on the test set.
    pub closed_gap: Option<f64>,
    pub par10: f64,
    pub par1: f64,
    pub solved_fraction: f64,
    pub m_sbs: f64,
    pub m_vbs: f64,
    pub sbs: String,
    pub n_test: usize,
    pub n_prepared: usize,
    pub features: Vec<String>,
    pub k: usize,
    pub backup: String,
    pub validation_score: Option<f64>,
    /// Configurations scored during learning, summed over validation splits.
    pub evaluations: usize,
    /// Mean overlap of feature and performance neighborhoods over the prepared set.
    pub jaccard: f64,
    pub unsolved: UnsolvedBreakdown,
    pub schedule_size: ScheduleSizeStats,
    pub outcomes: Vec<SimulationOutcome>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

/// The whole experiment: every fold plus summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub config: TrainingConfig,
    pub folds: Vec<FoldReport>,
    /// Mean closed gap over folds where it is defined.
    pub mean_closed_gap: Option<f64>,
    pub repetition_closed_gap: Vec<Option<f64>>,
    pub mean_par10: f64,
    pub mean_solved_fraction: f64,
    pub mean_jaccard: f64,
    pub repetition_jaccard: Vec<f64>,
    pub unsolved: UnsolvedBreakdown,
    pub schedule_size: ScheduleSizeStats,
    pub indicators: ScenarioIndicators,
    pub timeouts: usize,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn run_fold(
    scenario: &Scenario,
    config: &TrainingConfig,
    plan: &FoldPlan,
    fold: usize,
) -> Result<FoldReport> {
    let started = Instant::now();
    let outer = &plan.folds[fold];
    let cap = Duration::from_secs_f64(config.time_cap.min(1e9));
    let deadline = started + cap;
    let lineage = [plan.repetition as u64, fold as u64];
    let trained = learn_and_fit(
        scenario,
        &outer.prepared,
        &outer.inner,
        config,
        &lineage,
        Some(deadline),
    )?;
    let status = if trained.timed_out || Instant::now() > deadline {
        FoldStatus::Timeout
    } else {
        FoldStatus::Ok
    };
    let model = &trained.model;
    let eval = evaluate_model(
        scenario,
        model,
        &outer.test,
        config.penalty,
        config.charge_feature_cost,
    )?;
    let scores = &eval.scores;
    // self-matches are excluded, so at most |prepared| - 1 neighbors exist
    let jaccard_k = model.k().min(outer.prepared.len() - 1).max(1);
    let jaccard = jaccard_neighborhoods(scenario, &model.model, &outer.prepared, jaccard_k)
        .map(|r| r.mean)
        .unwrap_or(0.0);
    Ok(FoldReport {
        repetition: plan.repetition,
        fold,
        status,
        closed_gap: match status {
            FoldStatus::Timeout => Some(0.0),
            FoldStatus::Ok => scores.closed_gap,
        },
        par10: scores.par,
        par1: scores.par1,
        solved_fraction: scores.solved_fraction,
        m_sbs: scores.m_sbs,
        m_vbs: scores.m_vbs,
        sbs: scores.sbs.clone(),
        n_test: outer.test.len(),
        n_prepared: outer.prepared.len(),
        features: model.feature_names(scenario),
        k: model.k(),
        backup: scenario.algorithm_ids()[model.backup()].clone(),
        validation_score: model.validation_score,
        evaluations: trained.candidates.iter().map(|c| c.evaluations).sum(),
        jaccard,
        unsolved: classify_unsolved(&eval.outcomes),
        schedule_size: schedule_size_stats(&eval.schedules)?,
        outcomes: eval.outcomes,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Runs `config.repetitions` repetitions of the nested cross-validation. Folds run in
/// parallel; the report is ordered by repetition and fold and does not depend on the
/// thread count.
pub fn run_nested_cv(scenario: &Scenario, config: &TrainingConfig) -> Result<ExperimentReport> {
    let plans: Vec<FoldPlan> = (0..config.repetitions)
        .into_par_iter()
        .map(|r| FoldPlan::build(scenario, config, r))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = plans
        .iter()
        .enumerate()
        .flat_map(|(r, p)| (0..p.folds.len()).map(move |f| (r, f)))
        .collect();
    let folds: Vec<FoldReport> = jobs
        .par_iter()
        .map(|&(r, f)| {
            let report = run_fold(scenario, config, &plans[r], f)?;
            log::info!(
                "repetition {r} fold {f}: closed gap {:?}, k = {}, features {:?}",
                report.closed_gap,
                report.k,
                report.features
            );
            Ok(report)
        })
        .collect::<Result<_>>()?;

    let all: Vec<usize> = (0..scenario.n_instances()).collect();
    let outcomes: Vec<SimulationOutcome> = folds
        .iter()
        .flat_map(|f| f.outcomes.iter().cloned())
        .collect();
    // pooled schedule-size statistics from the per-fold moments
    let total: usize = folds.iter().map(|f| f.schedule_size.count).sum();
    let pooled_mean = folds
        .iter()
        .map(|f| f.schedule_size.mean * f.schedule_size.count as f64)
        .sum::<f64>()
        / total.max(1) as f64;
    let pooled_sq = folds
        .iter()
        .map(|f| {
            let s = &f.schedule_size;
            (s.std * s.std + s.mean * s.mean) * s.count as f64
        })
        .sum::<f64>()
        / total.max(1) as f64;
    let schedule_size = ScheduleSizeStats {
        count: total,
        mean: pooled_mean,
        std: (pooled_sq - pooled_mean * pooled_mean).max(0.0).sqrt(),
    };

    Ok(ExperimentReport {
        scenario: scenario.name().to_string(),
        config: config.clone(),
        mean_closed_gap: mean(folds.iter().filter_map(|f| f.closed_gap)),
        repetition_closed_gap: (0..config.repetitions)
            .map(|r| {
                mean(
                    folds
                        .iter()
                        .filter(|f| f.repetition == r)
                        .filter_map(|f| f.closed_gap),
                )
            })
            .collect(),
        mean_par10: mean(folds.iter().map(|f| f.par10)).unwrap_or(0.0),
        mean_solved_fraction: mean(folds.iter().map(|f| f.solved_fraction)).unwrap_or(0.0),
        mean_jaccard: mean(folds.iter().map(|f| f.jaccard)).unwrap_or(0.0),
        repetition_jaccard: (0..config.repetitions)
            .map(|r| {
                mean(
                    folds
                        .iter()
                        .filter(|f| f.repetition == r)
                        .map(|f| f.jaccard),
                )
                .unwrap_or(0.0)
            })
            .collect(),
        unsolved: classify_unsolved(&outcomes),
        schedule_size,
        indicators: scenario_indicators(scenario, &all, config.penalty),
        timeouts: folds
            .iter()
            .filter(|f| f.status == FoldStatus::Timeout)
            .count(),
        folds,
    })
}
