//! Feature cleaning: constant-feature removal, median imputation and [-1, 1] scaling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Per-feature statistics learned on a fitting set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

/// Scaling transform fitted on a subset of instances and applicable to any instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTransform {
    kept: Vec<usize>,
    stats: Vec<FeatureStats>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl FeatureTransform {
    /// Fits min, max and median of every feature over `fit_rows`; features that are
    /// constant (or entirely missing) there are dropped.
    pub fn fit(scenario: &Scenario, fit_rows: &[usize]) -> Result<Self> {
        if fit_rows.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        let mut kept = Vec::new();
        let mut stats = Vec::new();
        let mut values = Vec::with_capacity(fit_rows.len());
        for f in 0..scenario.n_features() {
            values.clear();
            values.extend(fit_rows.iter().filter_map(|&i| scenario.feature(i, f)));
            if values.is_empty() {
                continue;
            }
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max == min {
                continue;
            }
            kept.push(f);
            stats.push(FeatureStats {
                min,
                max,
                median: median(&mut values),
            });
        }
        if kept.is_empty() {
            return Err(Error::NoInformativeFeatures);
        }
        Ok(FeatureTransform { kept, stats })
    }

    /// Rebuilds a transform from persisted statistics.
    pub fn from_parts(kept: Vec<usize>, stats: Vec<FeatureStats>) -> Result<Self> {
        if kept.len() != stats.len() || kept.is_empty() {
            return Err(Error::InvalidArgument(
                "feature transform needs one statistics record per kept feature".into(),
            ));
        }
        if stats.iter().any(|s| !(s.max > s.min)) {
            return Err(Error::InvalidArgument(
                "feature transform records a constant feature".into(),
            ));
        }
        Ok(FeatureTransform { kept, stats })
    }

    /// Original indices of the retained features, in scenario order.
    pub fn kept_features(&self) -> &[usize] {
        &self.kept
    }

    pub fn stats(&self) -> &[FeatureStats] {
        &self.stats
    }

    /// Position of an original feature among the kept ones.
    pub fn column_of(&self, feature: usize) -> Option<usize> {
        self.kept.binary_search(&feature).ok()
    }

    /// Scales one raw value of the kept feature at `column`.
    pub fn scale(&self, column: usize, raw: Option<f64>) -> f64 {
        let s = &self.stats[column];
        let x = raw.unwrap_or(s.median);
        2.0 * (x - s.min) / (s.max - s.min) - 1.0
    }

    /// Scaled values of all kept features of an instance.
    pub fn transform(&self, scenario: &Scenario, instance: usize) -> Vec<f64> {
        let row = scenario.feature_row(instance);
        self.kept
            .iter()
            .enumerate()
            .map(|(c, &f)| self.scale(c, row[f]))
            .collect()
    }

    /// Scaled values of the given original features, which must all be kept.
    pub fn transform_selected(
        &self,
        scenario: &Scenario,
        instance: usize,
        features: &[usize],
    ) -> Result<Vec<f64>> {
        let row = scenario.feature_row(instance);
        features
            .iter()
            .map(|&f| {
                let c = self.column_of(f).ok_or_else(|| {
                    Error::UnknownFeature(
                        scenario
                            .feature_names()
                            .get(f)
                            .cloned()
                            .unwrap_or_else(|| f.to_string()),
                    )
                })?;
                Ok(self.scale(c, row[f]))
            })
            .collect()
    }
}

/// A fitted transform together with the scaled rows of the fitting set.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedFeatures {
    pub transform: FeatureTransform,
    pub rows: Vec<usize>,
    /// One scaled row per entry of `rows`, one column per kept feature.
    pub scaled: Vec<Vec<f64>>,
}

pub fn preprocess_features(
    scenario: &Scenario,
    fit_rows: &[usize],
) -> Result<PreprocessedFeatures> {
    let transform = FeatureTransform::fit(scenario, fit_rows)?;
    let scaled = fit_rows
        .iter()
        .map(|&i| transform.transform(scenario, i))
        .collect();
    Ok(PreprocessedFeatures {
        transform,
        rows: fit_rows.to_vec(),
        scaled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioParts;

    fn one_feature(values: &[Option<f64>]) -> Scenario {
        let n = values.len();
        Scenario::new(ScenarioParts {
            name: "t".into(),
            instance_ids: (0..n).map(|i| format!("i{i}")).collect(),
            algorithm_ids: vec!["a".into(), "b".into()],
            runtime: vec![vec![1.0, 1.0]; n],
            solved: vec![vec![true, true]; n],
            feature_names: vec!["f".into()],
            features: values.iter().map(|v| vec![*v]).collect(),
            feature_cost: None,
            cutoff: 10.0,
        })
        .unwrap()
    }

    #[test]
    fn midpoint_scales_to_zero() {
        let s = one_feature(&[Some(0.0), Some(10.0), Some(5.0)]);
        let t = FeatureTransform::fit(&s, &[0, 1]).unwrap();
        assert_eq!(t.transform(&s, 2), vec![0.0]);
        assert_eq!(t.transform(&s, 0), vec![-1.0]);
        assert_eq!(t.transform(&s, 1), vec![1.0]);
    }

    #[test]
    fn unseen_values_may_leave_the_unit_range() {
        let s = one_feature(&[Some(0.0), Some(10.0), Some(20.0)]);
        let t = FeatureTransform::fit(&s, &[0, 1]).unwrap();
        assert_eq!(t.transform(&s, 2), vec![3.0]);
    }

    #[test]
    fn constant_features_are_dropped() {
        let s = one_feature(&[Some(7.0), Some(7.0), Some(1.0)]);
        assert!(matches!(
            FeatureTransform::fit(&s, &[0, 1]),
            Err(Error::NoInformativeFeatures)
        ));
        let t = FeatureTransform::fit(&s, &[0, 2]).unwrap();
        assert_eq!(t.kept_features(), &[0]);
    }

    #[test]
    fn missing_is_imputed_with_the_median() {
        // median of {1, 2, 3} is 2, which is the midpoint of [1, 3]
        let s = one_feature(&[Some(1.0), Some(2.0), Some(3.0), None]);
        let p = preprocess_features(&s, &[0, 1, 2, 3]).unwrap();
        assert_eq!(p.transform.stats()[0].median, 2.0);
        assert_eq!(p.scaled[3], vec![0.0]);
    }

    #[test]
    fn fit_rows_stay_in_unit_range_and_refit_is_identical() {
        let s = crate::synthetic::generate_synthetic_scenario(40, 3, 8, 100.0, 9).unwrap();
        let rows: Vec<usize> = (0..30).collect();
        let a = preprocess_features(&s, &rows).unwrap();
        let b = preprocess_features(&s, &rows).unwrap();
        assert_eq!(a, b);
        for row in &a.scaled {
            assert!(row.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn empty_fit_set_is_an_error() {
        let s = one_feature(&[Some(1.0)]);
        assert!(FeatureTransform::fit(&s, &[]).is_err());
    }
}
