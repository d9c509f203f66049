//! Diagnostics: neighborhood overlap between feature and performance space, the
//! taxonomy of unsolved instances, schedule sizes and runtime distributions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, FailureKind, SimulationOutcome};
use crate::scenario::Scenario;
use crate::sunny::{rank_by_distance, Schedule, SunnyModel};

/// `|A ∩ B| / |A ∪ B|` over sets of indices; two empty sets give 1.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    a.dedup();
    b.sort_unstable();
    b.dedup();
    let inter = a.iter().filter(|x| b.binary_search(x).is_ok()).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JaccardReport {
    /// `(instance, J)` pairs.
    pub per_instance: Vec<(usize, f64)>,
    pub mean: f64,
}

/// k nearest positions of `rows[me]` among the other rows.
fn neighbors_excluding<R: AsRef<[f64]>>(rows: &[R], me: usize, k: usize) -> Vec<usize> {
    rank_by_distance(rows[me].as_ref(), rows, k + 1)
        .into_iter()
        .map(|(_, p)| p)
        .filter(|&p| p != me)
        .take(k)
        .collect()
}

/// Overlap between each instance's k-neighborhood in the model's scaled feature space
/// and its k-neighborhood by effective runtime vectors, both searched among the
/// model's training instances with the instance itself excluded.
pub fn jaccard_neighborhoods(
    scenario: &Scenario,
    model: &SunnyModel,
    instances: &[usize],
    k: usize,
) -> Result<JaccardReport> {
    let training = model.training();
    if k == 0 || k > training.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} is outside 1..={}",
            training.len()
        )));
    }
    let performance: Vec<Vec<f64>> = training
        .iter()
        .map(|&i| {
            (0..scenario.n_algorithms())
                .map(|a| scenario.effective_runtime(i, a))
                .collect()
        })
        .collect();
    let mut per_instance = Vec::with_capacity(instances.len());
    for &instance in instances {
        let (fi, pi) = match training.iter().position(|&t| t == instance) {
            Some(p) => (
                neighbors_excluding(model.training_rows(), p, k),
                neighbors_excluding(&performance, p, k),
            ),
            None => {
                // an instance outside the training set joins as an extra row
                let mut features = model.training_rows().to_vec();
                features.push(model.query_row(scenario, instance)?);
                let mut perf = performance.clone();
                perf.push(
                    (0..scenario.n_algorithms())
                        .map(|a| scenario.effective_runtime(instance, a))
                        .collect(),
                );
                let me = training.len();
                (
                    neighbors_excluding(&features, me, k),
                    neighbors_excluding(&perf, me, k),
                )
            }
        };
        per_instance.push((instance, jaccard(&fi, &pi)));
    }
    let mean = if per_instance.is_empty() {
        0.0
    } else {
        per_instance.iter().map(|(_, j)| j).sum::<f64>() / per_instance.len() as f64
    };
    Ok(JaccardReport { per_instance, mean })
}

/// Failure taxonomy of a set of simulation outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UnsolvedBreakdown {
    pub solved: usize,
    pub wrong_solvers: usize,
    pub insufficient_time: usize,
    /// Fractions of the unsolved instances; zero when everything was solved.
    pub wrong_solvers_fraction: f64,
    pub insufficient_time_fraction: f64,
}

pub fn classify_unsolved(outcomes: &[SimulationOutcome]) -> UnsolvedBreakdown {
    let mut b = UnsolvedBreakdown::default();
    for o in outcomes {
        match (o.solved, o.failure_kind) {
            (true, _) => b.solved += 1,
            (false, Some(FailureKind::InsufficientTime)) => b.insufficient_time += 1,
            (false, _) => b.wrong_solvers += 1,
        }
    }
    let unsolved = b.wrong_solvers + b.insufficient_time;
    if unsolved > 0 {
        b.wrong_solvers_fraction = b.wrong_solvers as f64 / unsolved as f64;
        b.insufficient_time_fraction = b.insufficient_time as f64 / unsolved as f64;
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSizeStats {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

/// Mean and standard deviation of the number of positive slots per schedule.
pub fn schedule_size_stats(schedules: &[Schedule]) -> Result<ScheduleSizeStats> {
    if schedules.is_empty() {
        return Err(Error::InvalidArgument("no schedules".into()));
    }
    let n = schedules.len() as f64;
    let sizes: Vec<f64> = schedules.iter().map(|s| s.size() as f64).collect();
    let mean = sizes.iter().sum::<f64>() / n;
    let var = sizes.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok(ScheduleSizeStats {
        count: schedules.len(),
        mean,
        std: var.sqrt(),
    })
}

/// One rank of the runtime distribution: the i-th smallest time of each column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub rank: usize,
    pub sbs: f64,
    pub sbs_solved: bool,
    pub vbs: f64,
    pub vbs_solved: bool,
    pub selector: f64,
    pub selector_solved: bool,
}

fn sorted_column(mut column: Vec<(f64, bool)>) -> Vec<(f64, bool)> {
    column.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    column
}

/// Per-instance times of the SBS, the VBS and the selector over the outcomes'
/// instances, each column sorted ascending on its own. Unsolved entries are τ.
pub fn runtime_distribution(
    scenario: &Scenario,
    outcomes: &[SimulationOutcome],
    penalty: f64,
) -> Vec<DistributionRow> {
    let instances: Vec<usize> = outcomes.iter().map(|o| o.instance).collect();
    let (sbs, _) = metrics::sbs(scenario, &instances, penalty);
    let cutoff = scenario.cutoff();
    let sbs_col = sorted_column(
        instances
            .iter()
            .map(|&i| {
                (
                    scenario.effective_runtime(i, sbs),
                    scenario.is_solved(i, sbs),
                )
            })
            .collect(),
    );
    let vbs_col = sorted_column(
        instances
            .iter()
            .map(|&i| {
                let best = scenario.best_algorithm(i);
                match best {
                    Some(a) => (scenario.runtime(i, a), true),
                    None => (cutoff, false),
                }
            })
            .collect(),
    );
    let sel_col = sorted_column(
        outcomes
            .iter()
            .map(|o| (if o.solved { o.effective_time } else { cutoff }, o.solved))
            .collect(),
    );
    (0..instances.len())
        .map(|r| DistributionRow {
            rank: r + 1,
            sbs: sbs_col[r].0,
            sbs_solved: sbs_col[r].1,
            vbs: vbs_col[r].0,
            vbs_solved: vbs_col[r].1,
            selector: sel_col[r].0,
            selector_solved: sel_col[r].1,
        })
        .collect()
}

/// Scenario-level indicators: how often the SBS fails, and how far it is from the VBS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioIndicators {
    pub sbs_unsolved_fraction: f64,
    /// `m_sbs / m_vbs` under the given penalty; infinite when the VBS scores 0.
    pub sbs_vbs_ratio: f64,
}

pub fn scenario_indicators(
    scenario: &Scenario,
    instances: &[usize],
    penalty: f64,
) -> ScenarioIndicators {
    let (sbs, m_sbs) = metrics::sbs(scenario, instances, penalty);
    let m_vbs = metrics::vbs_par(scenario, instances, penalty);
    let unsolved = instances
        .iter()
        .filter(|&&i| !scenario.is_solved(i, sbs))
        .count();
    ScenarioIndicators {
        sbs_unsolved_fraction: if instances.is_empty() {
            0.0
        } else {
            unsolved as f64 / instances.len() as f64
        },
        sbs_vbs_ratio: if m_vbs > 0.0 {
            m_sbs / m_vbs
        } else {
            f64::INFINITY
        },
    }
}
