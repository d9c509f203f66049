//! Scoring primitives: PAR, VBS/SBS baselines, closed gap, speedup, Borda counts and
//! schedule simulation against recorded runtimes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::sunny::Schedule;

/// Penalty factor of the PAR10 score.
pub const PAR10: f64 = 10.0;

/// Penalized runtime: `runtime` when solved strictly below the cutoff, `penalty * cutoff` otherwise.
pub fn par_value(runtime: f64, solved: bool, cutoff: f64, penalty: f64) -> f64 {
    if solved && runtime < cutoff {
        runtime
    } else {
        penalty * cutoff
    }
}

/// Why a simulated schedule failed on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureKind {
    /// No scheduled algorithm solves the instance at all.
    WrongSolvers,
    /// A scheduled algorithm solves it, but not within its slot.
    InsufficientTime,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::WrongSolvers => "wrong_solvers",
            FailureKind::InsufficientTime => "insufficient_time",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub instance: usize,
    pub solved: bool,
    /// Time at which the schedule solved the instance, τ when unsolved.
    pub effective_time: f64,
    pub solving_algorithm: Option<usize>,
    pub failure_kind: Option<FailureKind>,
}

impl SimulationOutcome {
    pub fn par(&self, cutoff: f64, penalty: f64) -> f64 {
        par_value(self.effective_time, self.solved, cutoff, penalty)
    }
}

/// Runs `schedule` on `instance` using the recorded runtimes.
///
/// Slots execute in order after the feature extraction cost (when charged). The first
/// algorithm that solves the instance within its slot, and before the cutoff, wins.
pub fn simulate_schedule(
    schedule: &Schedule,
    scenario: &Scenario,
    instance: usize,
    charge_feature_cost: bool,
) -> Result<SimulationOutcome> {
    if instance >= scenario.n_instances() {
        return Err(Error::UnknownInstance(instance.to_string()));
    }
    if let Some(s) = schedule
        .slots
        .iter()
        .find(|s| s.algorithm >= scenario.n_algorithms())
    {
        return Err(Error::UnknownAlgorithm(s.algorithm.to_string()));
    }
    let cutoff = scenario.cutoff();
    let cost = if charge_feature_cost {
        scenario.feature_cost(instance)
    } else {
        0.0
    };
    let unsolved = |kind| SimulationOutcome {
        instance,
        solved: false,
        effective_time: cutoff,
        solving_algorithm: None,
        failure_kind: Some(kind),
    };
    if cost > cutoff {
        return Ok(unsolved(FailureKind::WrongSolvers));
    }
    let mut start = cost;
    for slot in &schedule.slots {
        let a = slot.algorithm;
        if scenario.is_solved(instance, a) {
            let t = scenario.runtime(instance, a);
            if t <= slot.seconds && start + t <= cutoff {
                return Ok(SimulationOutcome {
                    instance,
                    solved: true,
                    effective_time: start + t,
                    solving_algorithm: Some(a),
                    failure_kind: None,
                });
            }
        }
        start += slot.seconds;
    }
    let could_solve = schedule
        .slots
        .iter()
        .any(|s| scenario.is_solved(instance, s.algorithm));
    Ok(unsolved(if could_solve {
        FailureKind::InsufficientTime
    } else {
        FailureKind::WrongSolvers
    }))
}

/// Allocation-free core of [`simulate_schedule`]: `(solved, effective time)`.
pub(crate) fn simulate_fast(
    schedule: &Schedule,
    scenario: &Scenario,
    instance: usize,
    charge_feature_cost: bool,
) -> (bool, f64) {
    let cutoff = scenario.cutoff();
    let mut start = if charge_feature_cost {
        scenario.feature_cost(instance)
    } else {
        0.0
    };
    if start > cutoff {
        return (false, cutoff);
    }
    for slot in &schedule.slots {
        if scenario.is_solved(instance, slot.algorithm) {
            let t = scenario.runtime(instance, slot.algorithm);
            if t <= slot.seconds && start + t <= cutoff {
                return (true, start + t);
            }
        }
        start += slot.seconds;
    }
    (false, cutoff)
}

/// Mean over `instances` of the best PAR any algorithm achieves.
pub fn vbs_par(scenario: &Scenario, instances: &[usize], penalty: f64) -> f64 {
    if instances.is_empty() {
        return 0.0;
    }
    let total: f64 = instances
        .iter()
        .map(|&i| {
            (0..scenario.n_algorithms())
                .map(|a| scenario.par(i, a, penalty))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / instances.len() as f64
}

/// Mean PAR of one algorithm over `instances`.
pub fn algorithm_par(
    scenario: &Scenario,
    instances: &[usize],
    algorithm: usize,
    penalty: f64,
) -> f64 {
    if instances.is_empty() {
        return 0.0;
    }
    instances
        .iter()
        .map(|&i| scenario.par(i, algorithm, penalty))
        .sum::<f64>()
        / instances.len() as f64
}

/// The single algorithm with the lowest mean PAR over `instances`, ties to the lower
/// index (the lexicographically smallest id), together with that mean.
pub fn sbs(scenario: &Scenario, instances: &[usize], penalty: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for a in 0..scenario.n_algorithms() {
        let score = algorithm_par(scenario, instances, a, penalty);
        if score < best.1 {
            best = (a, score);
        }
    }
    best
}

/// `(m_sbs - m_s) / (m_sbs - m_vbs)`; undefined unless the SBS is strictly worse than the VBS.
pub fn closed_gap(m_sbs: f64, m_s: f64, m_vbs: f64) -> Result<f64> {
    if !(m_sbs > m_vbs) {
        return Err(Error::UndefinedBaseline { m_sbs, m_vbs });
    }
    Ok((m_sbs - m_s) / (m_sbs - m_vbs))
}

/// `m_vbs / m_s`, in (0, 1] for any selector.
pub fn speedup_ratio(m_vbs: f64, m_s: f64) -> f64 {
    if m_s == 0.0 {
        1.0
    } else {
        m_vbs / m_s
    }
}

/// Pairwise comparison of two selectors' times on one instance.
///
/// The timeout clauses come first, so a timed-out selector never earns a tie; times
/// within `delta` of each other tie at 0.5; otherwise `t' / (t + t')`.
pub fn cmp_delta(t: f64, t_other: f64, cutoff: f64, delta: f64) -> f64 {
    if t >= cutoff {
        0.0
    } else if t_other >= cutoff {
        1.0
    } else if (t - t_other).abs() <= delta {
        0.5
    } else {
        t_other / (t + t_other)
    }
}

/// Normalized Borda-δ score of every selector.
///
/// `times[s][i]` is the time of selector `s` on instance `i` (τ when unsolved); the
/// result is `1/|I| Σ_i Σ_{s' ≠ s} cmp_delta(times[s][i], times[s'][i])`.
pub fn borda_table(times: &[Vec<f64>], cutoff: f64, delta: f64) -> Result<Vec<f64>> {
    let Some(first) = times.first() else {
        return Ok(Vec::new());
    };
    let n = first.len();
    if times.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument(
            "every selector needs a time for every instance".into(),
        ));
    }
    let mut scores = vec![0.0; times.len()];
    for i in 0..n {
        for (s, score) in scores.iter_mut().enumerate() {
            for (other, row) in times.iter().enumerate() {
                if other != s {
                    *score += cmp_delta(times[s][i], row[i], cutoff, delta);
                }
            }
        }
    }
    if n > 0 {
        for score in &mut scores {
            *score /= n as f64;
        }
    }
    Ok(scores)
}

/// Aggregate scores of a selector over an evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateScores {
    pub n_instances: usize,
    pub penalty: f64,
    pub par: f64,
    pub par1: f64,
    /// PAR divided by `penalty * cutoff`.
    pub normalized_par: f64,
    pub normalized_par1: f64,
    pub solved_fraction: f64,
    pub m_vbs: f64,
    pub m_sbs: f64,
    pub sbs: String,
    /// `None` when the SBS is no worse than the VBS on this set.
    pub closed_gap: Option<f64>,
    pub speedup_ratio: f64,
}

/// Scores simulation outcomes against the VBS and the SBS of the same instances.
pub fn aggregate(
    scenario: &Scenario,
    outcomes: &[SimulationOutcome],
    penalty: f64,
) -> AggregateScores {
    let n = outcomes.len();
    let cutoff = scenario.cutoff();
    let instances: Vec<usize> = outcomes.iter().map(|o| o.instance).collect();
    let mean = |f: &dyn Fn(&SimulationOutcome) -> f64| {
        if n == 0 {
            0.0
        } else {
            outcomes.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let par = mean(&|o| o.par(cutoff, penalty));
    let par1 = mean(&|o| o.par(cutoff, 1.0));
    let solved_fraction = mean(&|o| if o.solved { 1.0 } else { 0.0 });
    let m_vbs = vbs_par(scenario, &instances, penalty);
    let (sbs_index, m_sbs) = sbs(scenario, &instances, penalty);
    AggregateScores {
        n_instances: n,
        penalty,
        par,
        par1,
        normalized_par: par / (penalty * cutoff),
        normalized_par1: par1 / cutoff,
        solved_fraction,
        m_vbs,
        m_sbs,
        sbs: scenario.algorithm_ids()[sbs_index].clone(),
        closed_gap: closed_gap(m_sbs, par, m_vbs).ok(),
        speedup_ratio: speedup_ratio(m_vbs, par),
    }
}
