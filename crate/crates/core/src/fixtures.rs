//! The five-instance, four-solver worked example used throughout the test suites.
//!
//! Instances `x1`..`x5` carry the runtimes below (τ = 1800 s, `-` = timeout). A sixth
//! instance `x` plays the query whose five nearest neighbors are `x1`..`x5`.
//!
//! ```text
//!        x1    x2    x3    x4    x5
//! A1     -     -      3    -    278
//! A2     -    593     -    -     -
//! A3     -     -     36  1452    -
//! A4     -     -      -   122    60
//! ```

use crate::scenario::{Scenario, ScenarioParts};

pub const EXAMPLE_ONE_CUTOFF: f64 = 1800.0;

/// Runtimes of `x1`..`x5`, one row per instance, `None` for a timeout.
pub const EXAMPLE_ONE_RUNTIMES: [[Option<f64>; 4]; 5] = [
    [None, None, None, None],
    [None, Some(593.0), None, None],
    [Some(3.0), None, Some(36.0), None],
    [None, None, Some(1452.0), Some(122.0)],
    [Some(278.0), None, None, Some(60.0)],
];

/// The worked example as a scenario with instances `x1`..`x5` followed by the query `x`.
pub fn example_one() -> Scenario {
    let cutoff = EXAMPLE_ONE_CUTOFF;
    let mut instance_ids: Vec<String> = (1..=5).map(|i| format!("x{i}")).collect();
    instance_ids.push("x".into());

    let mut runtime: Vec<Vec<f64>> = EXAMPLE_ONE_RUNTIMES
        .iter()
        .map(|row| row.iter().map(|t| t.unwrap_or(cutoff)).collect())
        .collect();
    let mut solved: Vec<Vec<bool>> = EXAMPLE_ONE_RUNTIMES
        .iter()
        .map(|row| row.iter().map(Option::is_some).collect())
        .collect();
    // the query is solved only by A4, in 100 s
    runtime.push(vec![cutoff, cutoff, cutoff, 100.0]);
    solved.push(vec![false, false, false, true]);

    let mut features: Vec<Vec<Option<f64>>> =
        (1..=5).map(|i| vec![Some(i as f64), Some(0.0)]).collect();
    features.push(vec![Some(3.0), Some(0.0)]);

    Scenario::new(ScenarioParts {
        name: "example-one".into(),
        instance_ids,
        algorithm_ids: (1..=4).map(|a| format!("A{a}")).collect(),
        runtime,
        solved,
        feature_names: vec!["position".into(), "constant".into()],
        features,
        feature_cost: None,
        cutoff,
    })
    .expect("worked example is a valid scenario")
}

/// Indices of `x1`..`x5` in [`example_one`].
pub fn example_one_neighbors() -> Vec<usize> {
    (0..5).collect()
}

/// Index of the query instance `x` in [`example_one`].
pub const EXAMPLE_ONE_QUERY: usize = 5;

/// Cutoff of [`borda_toy`].
pub const BORDA_TOY_CUTOFF: f64 = 1000.0;

/// Three selectors on two instances, `times[s][i]`; selector 1 times out on the second
/// instance.
///
/// ```text
///        i1    i2
/// s1      1   500
/// s2      2     -
/// s3     10   700
/// ```
pub fn borda_toy() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 500.0],
        vec![2.0, BORDA_TOY_CUTOFF],
        vec![10.0, 700.0],
    ]
}

/// The scheduler of the worked example: trained on `x1`..`x5`, k = 5, backup `A3`,
/// exhaustive subset selection. Scheduling the query `x` yields
/// `[(A4,600),(A1,600),(A3,300),(A2,300)]`.
pub fn example_one_model(scenario: &Scenario) -> crate::Result<crate::LearnedModel> {
    let params = crate::SunnyParams {
        k: 5,
        selected_features: vec![0],
        backup: 2,
        schedule_limit: 3,
        engine: crate::Engine::Exhaustive,
    };
    Ok(crate::LearnedModel {
        scenario: scenario.name().to_string(),
        mode: crate::LearningMode::None,
        model: crate::SunnyModel::fit(scenario, &example_one_neighbors(), params)?,
        seed: 100,
        seed_lineage: Vec::new(),
        validation_score: None,
    })
}
