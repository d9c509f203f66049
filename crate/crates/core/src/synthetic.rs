//! Seeded generator of planted-cluster scenarios.
//!
//! Instances are dealt round-robin into one cluster per algorithm. Cluster `c` sits
//! around a random centroid in the informative feature subspace and is dominated by
//! algorithm `c`, which solves its instances quickly; every other algorithm times out
//! on them with probability `dominance` and otherwise solves them slowly. Noise
//! features are uniform and carry no cluster information.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::scenario::{Scenario, ScenarioParts};

/// Prefix of the names of features that encode the planted clusters.
pub const INFORMATIVE_PREFIX: &str = "info_";
/// Prefix of the names of pure-noise features.
pub const NOISE_PREFIX: &str = "noise_";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_instances: usize,
    pub n_algorithms: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    pub cutoff: f64,
    /// Probability that a non-dominant algorithm times out on a cluster instance.
    pub dominance: f64,
    /// Fraction of instances no algorithm solves.
    pub unsolvable_fraction: f64,
    /// Half-width of the uniform jitter around each cluster centroid.
    pub cluster_spread: f64,
    /// Fraction of feature cells replaced by missing values.
    pub missing_fraction: f64,
    /// Whether to record per-instance feature costs (up to 1% of the cutoff).
    pub feature_costs: bool,
    pub seed: u64,
}

impl SyntheticConfig {
    /// A configuration with `n_features` split into up to five informative features
    /// and noise for the rest.
    pub fn new(
        n_instances: usize,
        n_algorithms: usize,
        n_features: usize,
        cutoff: f64,
        seed: u64,
    ) -> Self {
        let n_informative = n_features.min(5);
        SyntheticConfig {
            n_instances,
            n_algorithms,
            n_informative,
            n_noise: n_features - n_informative,
            cutoff,
            dominance: 0.95,
            unsolvable_fraction: 0.0,
            cluster_spread: 0.05,
            missing_fraction: 0.0,
            feature_costs: false,
            seed,
        }
    }

    /// The desk-scale fixture: 200 instances, 4 algorithms, 5 informative and 20
    /// noise features, dominance 0.95, seed 100.
    pub fn planted_fixture() -> Self {
        SyntheticConfig {
            n_informative: 5,
            n_noise: 20,
            ..SyntheticConfig::new(200, 4, 25, 1200.0, 100)
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_informative + self.n_noise
    }
}

/// Cluster (and dominant algorithm index) of the `i`-th generated instance.
pub fn cluster_of(config: &SyntheticConfig, instance: usize) -> usize {
    instance % config.n_algorithms
}

/// Generates a planted-cluster scenario; identical configurations give identical scenarios.
pub fn generate(config: &SyntheticConfig) -> Result<Scenario> {
    if config.n_instances == 0 || config.n_algorithms < 2 || config.n_features() == 0 {
        return Err(crate::Error::InvalidArgument(
            "synthetic scenarios need instances, two algorithms and one feature".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let tau = config.cutoff;
    let n = config.n_instances;
    let m = config.n_algorithms;

    let centroids: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..config.n_informative)
                .map(|_| rng.gen::<f64>())
                .collect()
        })
        .collect();

    // shuffled column positions so informative features are not simply listed first
    let mut columns: Vec<String> = (0..config.n_informative)
        .map(|j| format!("{INFORMATIVE_PREFIX}{j}"))
        .chain((0..config.n_noise).map(|j| format!("{NOISE_PREFIX}{j:02}")))
        .collect();
    columns.shuffle(&mut rng);

    let mut unsolvable = vec![false; n];
    let n_unsolvable = (config.unsolvable_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for &i in order.iter().take(n_unsolvable.min(n)) {
        unsolvable[i] = true;
    }

    let mut runtime = Vec::with_capacity(n);
    let mut solved = Vec::with_capacity(n);
    let mut features = Vec::with_capacity(n);
    let mut costs = Vec::with_capacity(n);
    for (i, &never) in unsolvable.iter().enumerate() {
        let cluster = cluster_of(config, i);
        let mut rt_row = Vec::with_capacity(m);
        let mut ok_row = Vec::with_capacity(m);
        for a in 0..m {
            let (t, ok) = if a == cluster {
                (rng.gen_range(0.01..0.2) * tau, true)
            } else if rng.gen::<f64>() < config.dominance {
                (tau, false)
            } else {
                (rng.gen_range(0.2..0.9) * tau, true)
            };
            if never {
                rt_row.push(tau);
                ok_row.push(false);
            } else {
                rt_row.push(t);
                ok_row.push(ok);
            }
        }
        runtime.push(rt_row);
        solved.push(ok_row);

        let row: Vec<Option<f64>> = columns
            .iter()
            .map(|name| {
                let value = if let Some(j) = name.strip_prefix(INFORMATIVE_PREFIX) {
                    let j: usize = j.parse().expect("generated name");
                    centroids[cluster][j]
                        + rng.gen_range(-config.cluster_spread..=config.cluster_spread)
                } else {
                    rng.gen::<f64>()
                };
                if config.missing_fraction > 0.0 && rng.gen::<f64>() < config.missing_fraction {
                    None
                } else {
                    Some(value)
                }
            })
            .collect();
        features.push(row);
        costs.push(rng.gen_range(0.0..0.01) * tau);
    }

    let width = (n.max(2) - 1).to_string().len();
    let algo_width = (m.max(2) - 1).to_string().len();
    Scenario::new(ScenarioParts {
        name: format!("synthetic-{}", config.seed),
        instance_ids: (0..n).map(|i| format!("inst_{i:0width$}")).collect(),
        algorithm_ids: (0..m).map(|a| format!("algo_{a:0algo_width$}")).collect(),
        runtime,
        solved,
        feature_names: columns,
        features,
        feature_cost: config.feature_costs.then_some(costs),
        cutoff: tau,
    })
}

/// Shorthand for [`generate`] with the default split of informative and noise features.
pub fn generate_synthetic_scenario(
    n_instances: usize,
    n_algorithms: usize,
    n_features: usize,
    cutoff: f64,
    seed: u64,
) -> Result<Scenario> {
    generate(&SyntheticConfig::new(
        n_instances,
        n_algorithms,
        n_features,
        cutoff,
        seed,
    ))
}

/// Whether a feature name marks a planted informative feature.
pub fn is_informative(name: &str) -> bool {
    name.starts_with(INFORMATIVE_PREFIX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;
    use crate::scenario::discard_unsolvable;

    #[test]
    fn same_seed_same_scenario() {
        let a = generate_synthetic_scenario(50, 3, 6, 100.0, 7).unwrap();
        let b = generate_synthetic_scenario(50, 3, 6, 100.0, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_scenario(50, 3, 6, 100.0, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn full_dominance_vbs_solves_everything() {
        let config = SyntheticConfig {
            dominance: 1.0,
            ..SyntheticConfig::new(80, 4, 5, 100.0, 3)
        };
        let s = generate(&config).unwrap();
        assert!((0..s.n_instances()).all(|i| s.is_solvable(i)));
        // each algorithm solves exactly its own cluster
        for i in 0..s.n_instances() {
            for a in 0..s.n_algorithms() {
                assert_eq!(s.is_solved(i, a), a == cluster_of(&config, i));
            }
        }
    }

    #[test]
    fn sbs_solves_its_cluster_plus_residuals() {
        let config = SyntheticConfig::new(200, 4, 5, 1200.0, 11);
        let s = generate(&config).unwrap();
        let all: Vec<usize> = (0..200).collect();
        let (sbs, _) = metrics::sbs(&s, &all, 10.0);
        // brute-force scan of the generated matrix
        let own = all
            .iter()
            .filter(|&&i| cluster_of(&config, i) == sbs)
            .count();
        let residual = all
            .iter()
            .filter(|&&i| cluster_of(&config, i) != sbs && s.is_solved(i, sbs))
            .count();
        let solved = all.iter().filter(|&&i| s.is_solved(i, sbs)).count();
        assert_eq!(own, 50);
        assert_eq!(solved, own + residual);
        // 150 foreign instances, each solved with probability 0.05
        assert!(residual < 25, "residual = {residual}");
    }

    #[test]
    fn unsolvable_fraction_is_exact() {
        let config = SyntheticConfig {
            unsolvable_fraction: 0.1,
            ..SyntheticConfig::new(200, 4, 5, 100.0, 5)
        };
        let s = generate(&config).unwrap();
        let all: Vec<usize> = (0..200).collect();
        assert_eq!(discard_unsolvable(&s, &all).len(), 180);
    }

    #[test]
    fn feature_names_mark_informative_columns() {
        let s = generate(&SyntheticConfig::planted_fixture()).unwrap();
        assert_eq!(s.n_features(), 25);
        assert_eq!(
            s.feature_names()
                .iter()
                .filter(|f| is_informative(f))
                .count(),
            5
        );
        assert_eq!(s.n_algorithms(), 4);
    }
}
