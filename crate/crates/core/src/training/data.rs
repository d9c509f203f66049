//! Training-set preparation and fold construction.

use log::warn;
use rand::seq::SliceRandom;

use super::config::{SplitMode, TrainingConfig};
use crate::error::{Error, Result};
use crate::scenario::{discard_unsolvable, Scenario};
use crate::seed::{derive_seed, rng};

/// Caps the training set at `limit` instances while keeping every solver represented.
///
/// Unsolvable instances are discarded. Each remaining instance joins the list of its
/// fastest solver; lists are sorted hardest first by that solver's runtime and then
/// drawn from round-robin in algorithm order until the limit is reached.
pub fn prepare_training_set(scenario: &Scenario, train: &[usize], limit: usize) -> Vec<usize> {
    let solvable = discard_unsolvable(scenario, train);
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); scenario.n_algorithms()];
    for &i in &solvable {
        if let Some(a) = scenario.best_algorithm(i) {
            lists[a].push(i);
        }
    }
    for (a, list) in lists.iter_mut().enumerate() {
        list.sort_by(|&x, &y| scenario.runtime(y, a).total_cmp(&scenario.runtime(x, a)));
    }
    let target = limit.min(solvable.len());
    let mut out = Vec::with_capacity(target);
    let mut cursor = vec![0usize; lists.len()];
    while out.len() < target {
        for (a, list) in lists.iter().enumerate() {
            if out.len() == target {
                break;
            }
            if let Some(&i) = list.get(cursor[a]) {
                out.push(i);
                cursor[a] += 1;
            }
        }
    }
    out
}

/// Hardness used by the rank split: summed effective runtime over all algorithms.
pub fn hardness(scenario: &Scenario, instance: usize) -> f64 {
    (0..scenario.n_algorithms())
        .map(|a| scenario.effective_runtime(instance, a))
        .sum()
}

fn deal(order: &[usize], n_folds: usize) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); n_folds];
    for (pos, &i) in order.iter().enumerate() {
        folds[pos % n_folds].push(i);
    }
    folds
}

/// Partitions `instances` into `n_folds` folds whose sizes differ by at most one.
pub fn split_folds(
    scenario: &Scenario,
    instances: &[usize],
    mode: SplitMode,
    n_folds: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if n_folds < 2 {
        return Err(Error::InvalidArgument(
            "at least two folds are needed".into(),
        ));
    }
    if n_folds > instances.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} instances into {n_folds} folds",
            instances.len()
        )));
    }
    let mut rng = rng(seed);
    let order: Vec<usize> = match mode {
        SplitMode::Random => {
            let mut order = instances.to_vec();
            order.shuffle(&mut rng);
            order
        }
        SplitMode::Stratified => {
            // labels in algorithm order, instances without a solver last
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); scenario.n_algorithms() + 1];
            for &i in instances {
                let label = scenario
                    .best_algorithm(i)
                    .unwrap_or(scenario.n_algorithms());
                groups[label].push(i);
            }
            let mut order = Vec::with_capacity(instances.len());
            for group in &mut groups {
                group.shuffle(&mut rng);
                order.extend_from_slice(group);
            }
            order
        }
        SplitMode::Rank => {
            let mut order = instances.to_vec();
            order.sort_by(|&x, &y| hardness(scenario, y).total_cmp(&hardness(scenario, x)));
            order
        }
    };
    Ok(deal(&order, n_folds))
}

/// One outer fold: the raw train/test split plus the prepared training set and its
/// validation sub-folds.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterFold {
    pub index: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub prepared: Vec<usize>,
    pub inner: Vec<Vec<usize>>,
    /// Seed of the inner split.
    pub seed: u64,
}

/// The folds of one repetition of the nested cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub repetition: usize,
    /// Seed of the outer split.
    pub seed: u64,
    pub folds: Vec<OuterFold>,
}

/// Prepares a training set and splits it into validation sub-folds. The fold count is
/// clamped to the prepared size.
pub fn prepare_inner(
    scenario: &Scenario,
    train: &[usize],
    config: &TrainingConfig,
    seed: u64,
) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    let prepared = prepare_training_set(scenario, train, config.instance_limit);
    if prepared.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "training set has {} solvable instances, need at least 2",
            prepared.len()
        )));
    }
    let n_inner = config.inner_folds.min(prepared.len());
    if n_inner < config.inner_folds {
        warn!(
            "only {} prepared instances; using {n_inner} validation folds",
            prepared.len()
        );
    }
    let inner = split_folds(scenario, &prepared, config.split_mode, n_inner, seed)?;
    Ok((prepared, inner))
}

impl FoldPlan {
    /// Builds repetition `repetition`: a seeded random outer split of every instance, then
    /// per outer training set the preparation and inner split in the configured mode.
    pub fn build(scenario: &Scenario, config: &TrainingConfig, repetition: usize) -> Result<Self> {
        let all: Vec<usize> = (0..scenario.n_instances()).collect();
        let seed = derive_seed(config.seed, &[repetition as u64]);
        let tests = split_folds(scenario, &all, SplitMode::Random, config.outer_folds, seed)?;
        let mut folds = Vec::with_capacity(tests.len());
        for (index, test) in tests.iter().enumerate() {
            let mut in_test = vec![false; scenario.n_instances()];
            test.iter().for_each(|&i| in_test[i] = true);
            let train: Vec<usize> = all.iter().copied().filter(|&i| !in_test[i]).collect();
            let inner_seed = derive_seed(config.seed, &[repetition as u64, index as u64 + 1]);
            let (prepared, inner) = prepare_inner(scenario, &train, config, inner_seed)?;
            folds.push(OuterFold {
                index,
                train,
                test: test.clone(),
                prepared,
                inner,
                seed: inner_seed,
            });
        }
        Ok(FoldPlan {
            repetition,
            seed,
            folds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scenario::ScenarioParts;

    /// Instances with prescribed hardness: algorithm 0 solves everything in `h` seconds,
    /// algorithm 1 times out.
    fn with_hardness(hardness: &[f64], labels: Option<&[usize]>) -> Scenario {
        let n = hardness.len();
        let cutoff = 1000.0;
        let runtime = hardness
            .iter()
            .enumerate()
            .map(|(i, &h)| match labels {
                Some(l) if l[i] == 1 => vec![cutoff, h],
                _ => vec![h, cutoff],
            })
            .collect();
        let solved = (0..n)
            .map(|i| match labels {
                Some(l) if l[i] == 1 => vec![false, true],
                _ => vec![true, false],
            })
            .collect();
        Scenario::new(ScenarioParts {
            name: "h".into(),
            instance_ids: (0..n).map(|i| format!("i{i:02}")).collect(),
            algorithm_ids: vec!["a".into(), "b".into()],
            runtime,
            solved,
            feature_names: vec!["f".into()],
            features: (0..n).map(|i| vec![Some(i as f64)]).collect(),
            feature_cost: None,
            cutoff,
        })
        .unwrap()
    }

    #[test]
    fn associations_on_the_worked_example() {
        let s = fixtures::example_one();
        let all: Vec<usize> = (0..5).collect();
        let prepared = prepare_training_set(&s, &all, 100);
        // column minima: x3 -> A1 (3), x2 -> A2 (593), x4 -> A4 (122), x5 -> A4 (60);
        // x1 is discarded
        assert_eq!(s.best_algorithm(2), Some(0));
        assert_eq!(s.best_algorithm(1), Some(1));
        assert_eq!(s.best_algorithm(3), Some(3));
        assert_eq!(s.best_algorithm(4), Some(3));
        assert_eq!(s.best_algorithm(0), None);
        // A4's list is hardest first: x4 then x5
        assert_eq!(prepared, vec![2, 1, 3, 4]);
    }

    #[test]
    fn limit_draws_round_robin_hardest_first() {
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let hardness: Vec<f64> = (0..20).map(|i| (i + 1) as f64).collect();
        let s = with_hardness(&hardness, Some(&labels));
        let all: Vec<usize> = (0..20).collect();
        let prepared = prepare_training_set(&s, &all, 10);
        assert_eq!(prepared, vec![18, 19, 16, 17, 14, 15, 12, 13, 10, 11]);
        assert_eq!(prepare_training_set(&s, &all, 100).len(), 20);
    }

    #[test]
    fn fold_sizes_for_every_mode() {
        let s = with_hardness(&(0..20).map(|i| i as f64).collect::<Vec<_>>(), None);
        let all: Vec<usize> = (0..20).collect();
        for mode in [SplitMode::Random, SplitMode::Stratified, SplitMode::Rank] {
            let folds = split_folds(&s, &all, mode, 10, 1).unwrap();
            assert!(folds.iter().all(|f| f.len() == 2), "{mode}");
            let mut seen: Vec<usize> = folds.concat();
            seen.sort();
            assert_eq!(seen, all);
        }
    }

    #[test]
    fn rank_split_deals_in_hardness_order() {
        // per-instance hardness = h + cutoff; the ranking follows h
        let s = with_hardness(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0], None);
        let all: Vec<usize> = (0..10).collect();
        let folds = split_folds(&s, &all, SplitMode::Rank, 2, 0).unwrap();
        assert_eq!(folds[0], vec![9, 7, 5, 3, 1]);
        assert_eq!(folds[1], vec![8, 6, 4, 2, 0]);
    }

    #[test]
    fn stratified_split_keeps_proportions() {
        let labels = [0, 0, 0, 0, 0, 0, 1, 1, 1, 1];
        let s = with_hardness(&[1.0; 10], Some(&labels));
        let all: Vec<usize> = (0..10).collect();
        let folds = split_folds(&s, &all, SplitMode::Stratified, 2, 42).unwrap();
        for fold in &folds {
            let a = fold.iter().filter(|&&i| labels[i] == 0).count();
            assert_eq!((a, fold.len() - a), (3, 2));
        }
    }

    #[test]
    fn too_many_folds() {
        let s = fixtures::example_one();
        assert!(split_folds(&s, &[0, 1], SplitMode::Random, 3, 0).is_err());
        assert!(split_folds(&s, &[0, 1], SplitMode::Random, 1, 0).is_err());
    }

    #[test]
    fn fold_plan_has_no_leakage() {
        let s = crate::synthetic::generate_synthetic_scenario(120, 3, 4, 100.0, 2).unwrap();
        let config = TrainingConfig::default();
        let plan = FoldPlan::build(&s, &config, 0).unwrap();
        assert_eq!(plan.folds.len(), 5);
        let mut tests: Vec<usize> = plan.folds.iter().flat_map(|f| f.test.clone()).collect();
        tests.sort();
        assert_eq!(tests, (0..120).collect::<Vec<_>>());
        for fold in &plan.folds {
            assert!(fold.prepared.iter().all(|i| !fold.test.contains(i)));
            assert_eq!(fold.inner.len(), 10);
            let mut inner: Vec<usize> = fold.inner.concat();
            inner.sort();
            let mut prepared = fold.prepared.clone();
            prepared.sort();
            assert_eq!(inner, prepared);
        }
        assert_eq!(plan, FoldPlan::build(&s, &config, 0).unwrap());
        assert_ne!(plan, FoldPlan::build(&s, &config, 1).unwrap());
    }
}
