//! The scheduling kernel: k-NN retrieval, solver subset selection, time allocation
//! and slot ordering.

use std::fmt;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics;
use crate::preprocess::FeatureTransform;
use crate::scenario::Scenario;

/// One entry of a schedule: run `algorithm` (scenario index) for `seconds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub algorithm: usize,
    pub seconds: f64,
}

/// Sequential solver schedule whose slots sum to the timeout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub slots: Vec<Slot>,
}

impl Schedule {
    pub fn new(slots: Vec<Slot>) -> Self {
        Schedule { slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.slots.iter().map(|s| s.seconds).sum()
    }

    /// Number of algorithms with a positive time allocation.
    pub fn size(&self) -> usize {
        self.slots.iter().filter(|s| s.seconds > 0.0).count()
    }

    /// Slots rounded to whole seconds; the rounding remainder goes to the last slot so
    /// the rounded slots sum to the rounded total.
    pub fn whole_seconds(&self) -> Vec<(usize, i64)> {
        let target = self.total().round() as i64;
        let mut out: Vec<(usize, i64)> = self
            .slots
            .iter()
            .map(|s| (s.algorithm, s.seconds.round() as i64))
            .collect();
        if let Some(last) = out.len().checked_sub(1) {
            let others: i64 = out[..last].iter().map(|(_, t)| t).sum();
            out[last].1 = target - others;
        }
        out
    }

    /// Whole-second slots labelled with algorithm ids.
    pub fn to_named(&self, scenario: &Scenario) -> Vec<(String, i64)> {
        self.whole_seconds()
            .into_iter()
            .map(|(a, t)| (scenario.algorithm_ids()[a].clone(), t))
            .collect()
    }

    /// Builds a schedule from `(algorithm id, seconds)` pairs.
    pub fn from_named<S: AsRef<str>>(scenario: &Scenario, slots: &[(S, f64)]) -> Result<Self> {
        let slots = slots
            .iter()
            .map(|(id, seconds)| {
                let algorithm = scenario
                    .algorithm_index(id.as_ref())
                    .ok_or_else(|| Error::UnknownAlgorithm(id.as_ref().to_string()))?;
                Ok(Slot {
                    algorithm,
                    seconds: *seconds,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Schedule { slots })
    }

    /// The submission JSON shape: `[["A4", 600], ["A1", 600], ...]`.
    pub fn to_json(&self, scenario: &Scenario) -> serde_json::Value {
        serde_json::Value::Array(
            self.to_named(scenario)
                .into_iter()
                .map(|(a, t)| serde_json::json!([a, t]))
                .collect(),
        )
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({}, {})", s.algorithm, s.seconds)?;
        }
        write!(f, "]")
    }
}

/// Solver subset selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Smallest subset maximizing neighborhood coverage (exponential in the portfolio).
    Exhaustive,
    /// One solver at a time by residual coverage, capped at the schedule limit.
    Greedy,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exhaustive" | "sunny" => Ok(Engine::Exhaustive),
            "greedy" => Ok(Engine::Greedy),
            other => Err(Error::InvalidArgument(format!("unknown engine `{other}`"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Exhaustive => "exhaustive",
            Engine::Greedy => "greedy",
        })
    }
}

/// The k training instances closest to a query.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    /// Positions in the training set passed to [`knn`].
    pub positions: Vec<usize>,
    pub distances: Vec<f64>,
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// All training positions ordered by distance to `query`, ties by position.
pub(crate) fn rank_by_distance<R: AsRef<[f64]>>(
    query: &[f64],
    training: &[R],
    limit: usize,
) -> Vec<(f64, usize)> {
    let mut ranked: Vec<(f64, usize)> = training
        .iter()
        .enumerate()
        .map(|(p, row)| (squared_distance(query, row.as_ref()), p))
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if limit < ranked.len() {
        ranked.select_nth_unstable_by(limit, order);
        ranked.truncate(limit);
    }
    ranked.sort_by(order);
    ranked
}

/// Euclidean k nearest neighbors of `query` among `training` rows.
pub fn knn<R: AsRef<[f64]>>(query: &[f64], training: &[R], k: usize) -> Result<Neighborhood> {
    if training.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if let Some(bad) = training.iter().find(|r| r.as_ref().len() != query.len()) {
        return Err(Error::InvalidArgument(format!(
            "query has {} features but a training row has {}",
            query.len(),
            bad.as_ref().len()
        )));
    }
    let ranked = rank_by_distance(query, training, k);
    let take = ranked.len();
    Ok(Neighborhood {
        positions: ranked[..take].iter().map(|&(_, p)| p).collect(),
        distances: ranked[..take].iter().map(|&(d, _)| d.sqrt()).collect(),
    })
}

/// Sum over the neighborhood of the fastest effective runtime within `subset`.
pub fn subset_runtime(scenario: &Scenario, neighborhood: &[usize], subset: &[usize]) -> f64 {
    neighborhood
        .iter()
        .map(|&i| {
            subset
                .iter()
                .map(|&a| scenario.effective_runtime(i, a))
                .fold(scenario.cutoff(), f64::min)
        })
        .sum()
}

type Bits = Vec<u64>;

fn coverage_bits(scenario: &Scenario, neighborhood: &[usize], algorithm: usize) -> Bits {
    let mut bits = vec![0u64; neighborhood.len().div_ceil(64)];
    for (pos, &i) in neighborhood.iter().enumerate() {
        if scenario.is_solved(i, algorithm) {
            bits[pos / 64] |= 1 << (pos % 64);
        }
    }
    bits
}

fn count(bits: &[u64]) -> u32 {
    bits.iter().map(|w| w.count_ones()).sum()
}

/// Advances `combo` (strictly increasing indices below `n`) to the next combination in
/// lexicographic order; false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let r = combo.len();
    let mut i = r;
    while i > 0 {
        i -= 1;
        if combo[i] < n - r + i {
            combo[i] += 1;
            for j in i + 1..r {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The smallest algorithm subset solving the most neighborhood instances, ties broken
/// by [`subset_runtime`] and then lexicographically. Returned in ascending index order;
/// empty when no algorithm solves any neighbor.
pub fn select_subset_exhaustive(scenario: &Scenario, neighborhood: &[usize]) -> Vec<usize> {
    let useful: Vec<usize> = (0..scenario.n_algorithms())
        .filter(|&a| neighborhood.iter().any(|&i| scenario.is_solved(i, a)))
        .collect();
    if useful.is_empty() {
        return Vec::new();
    }
    let bits: Vec<Bits> = useful
        .iter()
        .map(|&a| coverage_bits(scenario, neighborhood, a))
        .collect();
    let words = neighborhood.len().div_ceil(64);
    let mut union = vec![0u64; words];
    for b in &bits {
        for (u, w) in union.iter_mut().zip(b) {
            *u |= w;
        }
    }
    let target = count(&union);

    let mut scratch = vec![0u64; words];
    let mut subset = Vec::new();
    for size in 1..=useful.len() {
        let mut combo: Vec<usize> = (0..size).collect();
        let mut best: Option<(f64, Vec<usize>)> = None;
        loop {
            scratch.iter_mut().for_each(|w| *w = 0);
            for &c in &combo {
                for (s, w) in scratch.iter_mut().zip(&bits[c]) {
                    *s |= w;
                }
            }
            if count(&scratch) == target {
                subset.clear();
                subset.extend(combo.iter().map(|&c| useful[c]));
                let runtime = subset_runtime(scenario, neighborhood, &subset);
                if best.as_ref().is_none_or(|(r, _)| runtime < *r) {
                    best = Some((runtime, subset.clone()));
                }
            }
            if !next_combination(&mut combo, useful.len()) {
                break;
            }
        }
        if let Some((_, chosen)) = best {
            return chosen;
        }
    }
    unreachable!("the full useful set reaches the target coverage")
}

/// Greedy residual-coverage selection of at most `limit` algorithms, in pick order.
///
/// Each round picks the algorithm solving the most still-uncovered neighbors (ties:
/// lower runtime on those neighbors, then lower index) and stops early once no
/// algorithm covers anything new.
pub fn select_subset_greedy(
    scenario: &Scenario,
    neighborhood: &[usize],
    limit: usize,
) -> Vec<usize> {
    let m = scenario.n_algorithms();
    let mut covered = vec![false; neighborhood.len()];
    let mut chosen: Vec<usize> = Vec::with_capacity(limit);
    while chosen.len() < limit {
        let mut best: Option<(usize, f64, usize)> = None;
        for a in 0..m {
            if chosen.contains(&a) {
                continue;
            }
            let mut gain = 0;
            let mut time = 0.0;
            for (pos, &i) in neighborhood.iter().enumerate() {
                if !covered[pos] && scenario.is_solved(i, a) {
                    gain += 1;
                    time += scenario.runtime(i, a);
                }
            }
            if gain == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((g, t, _)) => gain > g || (gain == g && time < t),
            };
            if better {
                best = Some((gain, time, a));
            }
        }
        let Some((_, _, a)) = best else { break };
        chosen.push(a);
        for (pos, &i) in neighborhood.iter().enumerate() {
            if scenario.is_solved(i, a) {
                covered[pos] = true;
            }
        }
        if covered.iter().all(|&c| c) {
            break;
        }
    }
    chosen
}

/// Turns a selected subset into a schedule.
///
/// Every selected algorithm receives one slot per neighbor it solves, the backup
/// receives one slot per neighbor the subset leaves unsolved, each slot lasts
/// `cutoff / total slots`, and algorithms run by ascending mean effective runtime
/// over the neighborhood (ties by index).
pub fn allocate_and_order(
    scenario: &Scenario,
    neighborhood: &[usize],
    selected: &[usize],
    backup: usize,
    cutoff: f64,
) -> Result<Schedule> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "timeout must be positive, got {cutoff}"
        )));
    }
    let m = scenario.n_algorithms();
    if backup >= m {
        return Err(Error::UnknownAlgorithm(backup.to_string()));
    }
    if let Some(&bad) = selected.iter().find(|&&a| a >= m) {
        return Err(Error::UnknownAlgorithm(bad.to_string()));
    }
    let mut slots = vec![0usize; m];
    let mut uncovered = 0;
    for &i in neighborhood {
        let mut any = false;
        for &a in selected {
            if scenario.is_solved(i, a) {
                slots[a] += 1;
                any = true;
            }
        }
        if !any {
            uncovered += 1;
        }
    }
    slots[backup] += uncovered;
    let total: usize = slots.iter().sum();
    if uncovered > 0 && uncovered == neighborhood.len() {
        debug!("selected solvers cover no neighbor; whole timeout goes to the backup solver");
    }
    if total == 0 {
        return Ok(Schedule::new(vec![Slot {
            algorithm: backup,
            seconds: cutoff,
        }]));
    }

    let n = neighborhood.len().max(1) as f64;
    let mean = |a: usize| -> f64 {
        neighborhood
            .iter()
            .map(|&i| scenario.effective_runtime(i, a))
            .sum::<f64>()
            / n
    };
    let mut order: Vec<(f64, usize)> = (0..m)
        .filter(|&a| slots[a] > 0)
        .map(|a| (mean(a), a))
        .collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let unit = cutoff / total as f64;
    let mut out: Vec<Slot> = order
        .iter()
        .map(|&(_, a)| Slot {
            algorithm: a,
            seconds: unit * slots[a] as f64,
        })
        .collect();
    let last = out.len() - 1;
    let others: f64 = out[..last].iter().map(|s| s.seconds).sum();
    out[last].seconds = cutoff - others;
    Ok(Schedule::new(out))
}

/// The algorithm with the lowest summed PAR over `training`, ties by index.
pub fn backup_solver(scenario: &Scenario, training: &[usize], penalty: f64) -> Result<usize> {
    if training.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut best = (f64::INFINITY, 0);
    for a in 0..scenario.n_algorithms() {
        let total: f64 = training.iter().map(|&i| scenario.par(i, a, penalty)).sum();
        if total < best.0 {
            best = (total, a);
        }
    }
    Ok(best.1)
}

/// Selects a subset with `engine` and allocates the schedule for one neighborhood.
pub fn schedule_neighborhood(
    scenario: &Scenario,
    neighborhood: &[usize],
    engine: Engine,
    schedule_limit: usize,
    backup: usize,
) -> Result<Schedule> {
    let selected = match engine {
        Engine::Exhaustive => select_subset_exhaustive(scenario, neighborhood),
        Engine::Greedy => select_subset_greedy(scenario, neighborhood, schedule_limit),
    };
    allocate_and_order(scenario, neighborhood, &selected, backup, scenario.cutoff())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SunnyParams {
    pub k: usize,
    /// Original scenario feature indices.
    pub selected_features: Vec<usize>,
    pub backup: usize,
    pub schedule_limit: usize,
    pub engine: Engine,
}

/// Trained scheduling state: fitted transform, training instances and parameters.
#[derive(Debug, Clone)]
pub struct SunnyModel {
    transform: FeatureTransform,
    training: Vec<usize>,
    /// Training rows projected onto the selected features, scaled.
    training_rows: Vec<Vec<f64>>,
    params: SunnyParams,
}

impl SunnyModel {
    /// Fits the feature transform on `training` and projects it onto the selected features.
    pub fn fit(scenario: &Scenario, training: &[usize], params: SunnyParams) -> Result<Self> {
        let transform = FeatureTransform::fit(scenario, training)?;
        Self::with_transform(scenario, training, transform, params)
    }

    /// Builds a model around an already fitted transform.
    pub fn with_transform(
        scenario: &Scenario,
        training: &[usize],
        transform: FeatureTransform,
        params: SunnyParams,
    ) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if params.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if params.selected_features.is_empty() {
            return Err(Error::InvalidArgument("no features selected".into()));
        }
        if params.backup >= scenario.n_algorithms() {
            return Err(Error::UnknownAlgorithm(params.backup.to_string()));
        }
        let training_rows = training
            .iter()
            .map(|&i| transform.transform_selected(scenario, i, &params.selected_features))
            .collect::<Result<Vec<_>>>()?;
        Ok(SunnyModel {
            transform,
            training: training.to_vec(),
            training_rows,
            params,
        })
    }

    pub fn params(&self) -> &SunnyParams {
        &self.params
    }

    pub fn transform(&self) -> &FeatureTransform {
        &self.transform
    }

    pub fn training(&self) -> &[usize] {
        &self.training
    }

    pub fn training_rows(&self) -> &[Vec<f64>] {
        &self.training_rows
    }

    /// Scaled selected features of any scenario instance.
    pub fn query_row(&self, scenario: &Scenario, instance: usize) -> Result<Vec<f64>> {
        self.transform
            .transform_selected(scenario, instance, &self.params.selected_features)
    }

    /// Scenario indices of the k nearest training instances of `instance`.
    pub fn neighbors(&self, scenario: &Scenario, instance: usize) -> Result<Vec<usize>> {
        let query = self.query_row(scenario, instance)?;
        let hood = knn(&query, &self.training_rows, self.params.k)?;
        Ok(hood.positions.iter().map(|&p| self.training[p]).collect())
    }

    /// Schedule for one instance: transform, k-NN, subset selection, allocation.
    pub fn make_schedule(&self, scenario: &Scenario, instance: usize) -> Result<Schedule> {
        let neighbors = self.neighbors(scenario, instance)?;
        schedule_neighborhood(
            scenario,
            &neighbors,
            self.params.engine,
            self.params.schedule_limit,
            self.params.backup,
        )
    }
}

/// PAR of a schedule simulated on one instance; convenience for scoring loops.
pub(crate) fn simulated_par(
    schedule: &Schedule,
    scenario: &Scenario,
    instance: usize,
    penalty: f64,
    charge_feature_cost: bool,
) -> f64 {
    let (solved, time) = metrics::simulate_fast(schedule, scenario, instance, charge_feature_cost);
    metrics::par_value(time, solved, scenario.cutoff(), penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, EXAMPLE_ONE_CUTOFF};

    fn ids(scenario: &Scenario, algs: &[usize]) -> Vec<String> {
        algs.iter()
            .map(|&a| scenario.algorithm_ids()[a].clone())
            .collect()
    }

    #[test]
    fn knn_self_first_and_whole_set() {
        let training = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![3.0, 0.0]];
        let hood = knn(&[1.0, 1.0], &training, 1).unwrap();
        assert_eq!(hood.positions, vec![1]);
        assert_eq!(hood.distances, vec![0.0]);
        let hood = knn(&[1.0, 1.0], &training, 10).unwrap();
        assert_eq!(hood.positions.len(), 3);
    }

    #[test]
    fn knn_planted_points() {
        // distances from the origin: 5, 1, 3, sqrt 2, 2
        let training = vec![
            vec![3.0, 4.0],
            vec![0.0, 1.0],
            vec![3.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, -2.0],
        ];
        let hood = knn(&[0.0, 0.0], &training, 5).unwrap();
        assert_eq!(hood.positions, vec![1, 3, 4, 2, 0]);
        assert_eq!(hood.distances[0], 1.0);
        assert!((hood.distances[1] - 2f64.sqrt()).abs() < 1e-15);
        assert!(hood.distances.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn knn_ties_follow_training_order() {
        let training = vec![vec![1.0], vec![-1.0], vec![1.0]];
        let hood = knn(&[0.0], &training, 2).unwrap();
        assert_eq!(hood.positions, vec![0, 1]);
    }

    #[test]
    fn knn_errors() {
        let empty: Vec<Vec<f64>> = Vec::new();
        assert!(knn(&[0.0], &empty, 1).is_err());
        assert!(knn(&[0.0], &[vec![0.0, 1.0]], 1).is_err());
    }

    #[test]
    fn exhaustive_selection_on_the_worked_example() {
        let s = fixtures::example_one();
        let chosen = select_subset_exhaustive(&s, &fixtures::example_one_neighbors());
        assert_eq!(ids(&s, &chosen), ["A1", "A2", "A4"]);
    }

    #[test]
    fn exhaustive_singleton_when_one_solver_covers_all() {
        let s = fixtures::example_one();
        // x3 and x5 are both solved by A1
        assert_eq!(ids(&s, &select_subset_exhaustive(&s, &[2, 4])), ["A1"]);
        // nothing solvable: empty selection
        assert!(select_subset_exhaustive(&s, &[0]).is_empty());
    }

    #[test]
    fn greedy_selection_on_the_worked_example() {
        let s = fixtures::example_one();
        let hood = fixtures::example_one_neighbors();
        assert_eq!(
            ids(&s, &select_subset_greedy(&s, &hood, 3)),
            ["A4", "A1", "A2"]
        );
        assert_eq!(ids(&s, &select_subset_greedy(&s, &hood, 1)), ["A4"]);
        assert_eq!(ids(&s, &select_subset_greedy(&s, &[2, 4], 3)), ["A1"]);
    }

    #[test]
    fn allocation_reproduces_the_worked_example() {
        let s = fixtures::example_one();
        let hood = fixtures::example_one_neighbors();
        let a3 = s.algorithm_index("A3").unwrap();
        let selected = select_subset_exhaustive(&s, &hood);
        let schedule = allocate_and_order(&s, &hood, &selected, a3, EXAMPLE_ONE_CUTOFF).unwrap();
        assert_eq!(
            schedule.to_named(&s),
            vec![
                ("A4".to_string(), 600),
                ("A1".to_string(), 600),
                ("A3".to_string(), 300),
                ("A2".to_string(), 300)
            ]
        );
        assert_eq!(schedule.total(), EXAMPLE_ONE_CUTOFF);
    }

    #[test]
    fn allocation_single_solver_gets_everything() {
        let s = fixtures::example_one();
        let a1 = s.algorithm_index("A1").unwrap();
        let schedule = allocate_and_order(&s, &[2, 4], &[a1], 2, 1800.0).unwrap();
        assert_eq!(
            schedule.slots,
            vec![Slot {
                algorithm: a1,
                seconds: 1800.0
            }]
        );
    }

    #[test]
    fn allocation_degenerates_to_backup() {
        let s = fixtures::example_one();
        let schedule = allocate_and_order(&s, &[0], &[], 2, 1800.0).unwrap();
        assert_eq!(
            schedule.slots,
            vec![Slot {
                algorithm: 2,
                seconds: 1800.0
            }]
        );
        assert!(allocate_and_order(&s, &[0], &[], 2, 0.0).is_err());
    }

    #[test]
    fn backup_on_the_worked_example() {
        let s = fixtures::example_one();
        // A4: 3 * 18000 + 122 + 60 = 54182 is the lowest sum
        let b = backup_solver(&s, &fixtures::example_one_neighbors(), 10.0).unwrap();
        assert_eq!(s.algorithm_ids()[b], "A4");
        assert!(backup_solver(&s, &[], 10.0).is_err());
        // all-timeout training set: every sum ties, lowest index wins
        assert_eq!(backup_solver(&s, &[0], 10.0).unwrap(), 0);
    }

    #[test]
    fn whole_seconds_repairs_rounding() {
        let schedule = Schedule::new(vec![
            Slot {
                algorithm: 0,
                seconds: 1000.0 / 3.0,
            },
            Slot {
                algorithm: 1,
                seconds: 1000.0 / 3.0,
            },
            Slot {
                algorithm: 2,
                seconds: 1000.0 / 3.0,
            },
        ]);
        let rounded = schedule.whole_seconds();
        assert_eq!(rounded.iter().map(|s| s.1).sum::<i64>(), 1000);
        assert_eq!(rounded[2].1, 334);
    }

    #[test]
    fn model_schedules_the_worked_example() {
        let s = fixtures::example_one();
        let params = SunnyParams {
            k: 5,
            selected_features: vec![0],
            backup: s.algorithm_index("A3").unwrap(),
            schedule_limit: 3,
            engine: Engine::Exhaustive,
        };
        let model = SunnyModel::fit(&s, &fixtures::example_one_neighbors(), params).unwrap();
        let schedule = model
            .make_schedule(&s, fixtures::EXAMPLE_ONE_QUERY)
            .unwrap();
        assert_eq!(
            schedule.to_json(&s).to_string(),
            r#"[["A4",600],["A1",600],["A3",300],["A2",300]]"#
        );
    }

    #[test]
    fn one_nearest_neighbor_heads_the_schedule() {
        let s = fixtures::example_one();
        let params = SunnyParams {
            k: 1,
            selected_features: vec![0],
            backup: 0,
            schedule_limit: 3,
            engine: Engine::Greedy,
        };
        let model = SunnyModel::fit(&s, &fixtures::example_one_neighbors(), params).unwrap();
        // x2 is its own nearest neighbor and only A2 solves it
        let schedule = model.make_schedule(&s, 1).unwrap();
        assert_eq!(s.algorithm_ids()[schedule.slots[0].algorithm], "A2");
    }

    #[test]
    fn model_rejects_dropped_features() {
        let s = fixtures::example_one();
        let params = SunnyParams {
            k: 1,
            selected_features: vec![1], // constant on the training set
            backup: 0,
            schedule_limit: 3,
            engine: Engine::Greedy,
        };
        assert!(matches!(
            SunnyModel::fit(&s, &fixtures::example_one_neighbors(), params),
            Err(Error::UnknownFeature(_))
        ));
    }

    #[test]
    fn engine_round_trips_through_text() {
        for e in [Engine::Exhaustive, Engine::Greedy] {
            assert_eq!(e.to_string().parse::<Engine>().unwrap(), e);
        }
        assert!("bogus".parse::<Engine>().is_err());
    }
}
