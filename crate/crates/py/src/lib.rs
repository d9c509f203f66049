//! Python bindings: scenarios, training configuration, learned models, nested
//! cross-validation and the evaluation metrics.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use sunny_as2::metrics::AggregateScores;
use sunny_as2::synthetic::{generate, SyntheticConfig};
use sunny_as2::training::{self, ModelDocument};

fn err(e: sunny_as2::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An algorithm-selection scenario: runtimes and features per instance.
#[pyclass(name = "Scenario", module = "sunny_as2", frozen)]
struct Scenario {
    inner: sunny_as2::Scenario,
}

impl Scenario {
    fn indices(&self, ids: Option<Vec<String>>) -> PyResult<Vec<usize>> {
        match ids {
            None => Ok((0..self.inner.n_instances()).collect()),
            Some(ids) => ids
                .iter()
                .map(|id| {
                    self.inner
                        .instance_index(id)
                        .ok_or_else(|| PyValueError::new_err(format!("unknown instance `{id}`")))
                })
                .collect(),
        }
    }
}

#[pymethods]
impl Scenario {
    /// Loads a scenario directory in ASlib layout.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Scenario {
            inner: sunny_as2::load_scenario(&path).map_err(err)?,
        })
    }

    /// A planted-cluster scenario: each cluster is dominated by one algorithm and
    /// located by the informative features.
    #[staticmethod]
    #[pyo3(signature = (n_instances=200, n_algorithms=4, n_informative=5, n_noise=20, cutoff=1800.0, dominance=0.95, seed=100, unsolvable_fraction=0.0, missing_fraction=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn synthetic(
        n_instances: usize,
        n_algorithms: usize,
        n_informative: usize,
        n_noise: usize,
        cutoff: f64,
        dominance: f64,
        seed: u64,
        unsolvable_fraction: f64,
        missing_fraction: f64,
    ) -> PyResult<Self> {
        let config = SyntheticConfig {
            n_informative,
            n_noise,
            dominance,
            unsolvable_fraction,
            missing_fraction,
            ..SyntheticConfig::new(
                n_instances,
                n_algorithms,
                n_informative + n_noise,
                cutoff,
                seed,
            )
        };
        Ok(Scenario {
            inner: generate(&config).map_err(err)?,
        })
    }

    /// The five-instance worked example plus its query instance `x`.
    #[staticmethod]
    fn example_one() -> Self {
        Scenario {
            inner: sunny_as2::fixtures::example_one(),
        }
    }

    /// Writes the scenario in ASlib layout.
    fn save(&self, path: PathBuf) -> PyResult<()> {
        sunny_as2::scenario::write_scenario(&self.inner, &path).map_err(err)
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn cutoff(&self) -> f64 {
        self.inner.cutoff()
    }

    #[getter]
    fn instance_ids(&self) -> Vec<String> {
        self.inner.instance_ids().to_vec()
    }

    #[getter]
    fn algorithm_ids(&self) -> Vec<String> {
        self.inner.algorithm_ids().to_vec()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names().to_vec()
    }

    /// Runtime of `algorithm` on `instance`, or `None` when it was not solved.
    fn runtime(&self, instance: &str, algorithm: &str) -> PyResult<Option<f64>> {
        let i = self.indices(Some(vec![instance.to_string()]))?[0];
        let a = self
            .inner
            .algorithm_index(algorithm)
            .ok_or_else(|| PyValueError::new_err(format!("unknown algorithm `{algorithm}`")))?;
        Ok(self.inner.is_solved(i, a).then(|| self.inner.runtime(i, a)))
    }

    fn __len__(&self) -> usize {
        self.inner.n_instances()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario({:?}, instances={}, algorithms={}, features={}, cutoff={})",
            self.inner.name(),
            self.inner.n_instances(),
            self.inner.n_algorithms(),
            self.inner.n_features(),
            self.inner.cutoff()
        )
    }
}

/// Training and evaluation settings; keyword arguments use the config-file keys.
#[pyclass(name = "TrainingConfig", module = "sunny_as2")]
struct TrainingConfig {
    inner: sunny_as2::TrainingConfig,
}

#[pymethods]
impl TrainingConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut config = TrainingConfig {
            inner: sunny_as2::TrainingConfig::default(),
        };
        if let Some(kwargs) = kwargs {
            for (key, value) in kwargs.iter() {
                config.set(&key.extract::<String>()?, &value)?;
            }
        }
        Ok(config)
    }

    /// Parses the flat `key = value` format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(TrainingConfig {
            inner: sunny_as2::TrainingConfig::from_text(text).map_err(err)?,
        })
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        // Python booleans print as True/False
        let text = match value.extract::<bool>() {
            Ok(b) if value.is_instance_of::<pyo3::types::PyBool>() => b.to_string(),
            _ => value.str()?.to_string(),
        };
        self.inner.set(key, &text).map_err(err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        let fields: Vec<String> = self
            .inner
            .to_text()
            .lines()
            .map(|l| l.replace(" = ", "="))
            .collect();
        format!("TrainingConfig({})", fields.join(", "))
    }
}

/// A learned scheduler.
#[pyclass(name = "Model", module = "sunny_as2", frozen)]
struct Model {
    inner: sunny_as2::LearnedModel,
    features: Vec<String>,
    backup: String,
}

impl Model {
    fn wrap(inner: sunny_as2::LearnedModel, scenario: &sunny_as2::Scenario) -> Self {
        Model {
            features: inner.feature_names(scenario),
            backup: scenario.algorithm_ids()[inner.backup()].clone(),
            inner,
        }
    }
}

#[pymethods]
impl Model {
    /// Restores a model saved with `to_json` against its scenario.
    #[staticmethod]
    fn from_json(text: &str, scenario: &Scenario) -> PyResult<Self> {
        let doc = ModelDocument::from_json(text).map_err(err)?;
        let inner = sunny_as2::LearnedModel::from_document(&doc, &scenario.inner).map_err(err)?;
        Ok(Model::wrap(inner, &scenario.inner))
    }

    /// The model of the worked example (k = 5, backup A3, exhaustive selection).
    #[staticmethod]
    fn example_one(scenario: &Scenario) -> PyResult<Self> {
        let inner = sunny_as2::fixtures::example_one_model(&scenario.inner).map_err(err)?;
        Ok(Model::wrap(inner, &scenario.inner))
    }

    fn to_json(&self, scenario: &Scenario) -> PyResult<String> {
        self.inner
            .to_document(&scenario.inner)
            .to_json()
            .map_err(err)
    }

    #[getter]
    fn features(&self) -> Vec<String> {
        self.features.clone()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn backup(&self) -> &str {
        &self.backup
    }

    #[getter]
    fn validation_score(&self) -> Option<f64> {
        self.inner.validation_score
    }

    /// The schedule of one instance as `[(algorithm, seconds), ...]`.
    fn schedule(&self, scenario: &Scenario, instance: &str) -> PyResult<Vec<(String, i64)>> {
        let i = scenario.indices(Some(vec![instance.to_string()]))?[0];
        let schedule = self.inner.make_schedule(&scenario.inner, i).map_err(err)?;
        Ok(schedule.to_named(&scenario.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(features={:?}, k={}, backup={:?})",
            self.features,
            self.inner.k(),
            self.backup
        )
    }
}

fn scores_dict<'py>(py: Python<'py>, s: &AggregateScores) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("closed_gap", s.closed_gap)?;
    d.set_item("par10", s.par)?;
    d.set_item("par1", s.par1)?;
    d.set_item("solved_fraction", s.solved_fraction)?;
    d.set_item("m_sbs", s.m_sbs)?;
    d.set_item("m_vbs", s.m_vbs)?;
    d.set_item("sbs", &s.sbs)?;
    Ok(d)
}

fn config_or_default(config: Option<&TrainingConfig>) -> sunny_as2::TrainingConfig {
    config.map(|c| c.inner.clone()).unwrap_or_default()
}

/// Learns a model on the given instances (all by default).
#[pyfunction]
#[pyo3(signature = (scenario, config=None, instances=None))]
fn train(
    py: Python<'_>,
    scenario: &Scenario,
    config: Option<&TrainingConfig>,
    instances: Option<Vec<String>>,
) -> PyResult<Model> {
    let config = config_or_default(config);
    let instances = scenario.indices(instances)?;
    let trained = py
        .detach(|| training::train_model(&scenario.inner, &instances, &config))
        .map_err(err)?;
    Ok(Model::wrap(trained.model, &scenario.inner))
}

/// Schedules and simulates the instances (all by default) and returns the scores.
#[pyfunction]
#[pyo3(signature = (model, scenario, instances=None, penalty=10.0, charge_feature_cost=true))]
fn evaluate<'py>(
    py: Python<'py>,
    model: &Model,
    scenario: &Scenario,
    instances: Option<Vec<String>>,
    penalty: f64,
    charge_feature_cost: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let instances = scenario.indices(instances)?;
    let eval = py
        .detach(|| {
            training::evaluate_model(
                &scenario.inner,
                &model.inner,
                &instances,
                penalty,
                charge_feature_cost,
            )
        })
        .map_err(err)?;
    scores_dict(py, &eval.scores)
}

/// Runs the repeated nested cross-validation; optionally writes the report files.
#[pyfunction]
#[pyo3(signature = (scenario, config=None, out_dir=None))]
fn cross_validate<'py>(
    py: Python<'py>,
    scenario: &Scenario,
    config: Option<&TrainingConfig>,
    out_dir: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let config = config_or_default(config);
    let report = py
        .detach(|| training::run_nested_cv(&scenario.inner, &config))
        .map_err(err)?;
    if let Some(dir) = out_dir {
        sunny_as2::report::write_cv_reports(&dir, &scenario.inner, &report).map_err(err)?;
    }
    let folds = PyList::empty(py);
    for f in &report.folds {
        let d = PyDict::new(py);
        d.set_item("repetition", f.repetition)?;
        d.set_item("fold", f.fold)?;
        d.set_item("status", f.status.as_str())?;
        d.set_item("closed_gap", f.closed_gap)?;
        d.set_item("par10", f.par10)?;
        d.set_item("solved_fraction", f.solved_fraction)?;
        d.set_item("features", f.features.clone())?;
        d.set_item("k", f.k)?;
        d.set_item("backup", &f.backup)?;
        d.set_item("jaccard", f.jaccard)?;
        folds.append(d)?;
    }
    let out = PyDict::new(py);
    out.set_item("seed", report.config.seed)?;
    out.set_item("mean_closed_gap", report.mean_closed_gap)?;
    out.set_item("mean_par10", report.mean_par10)?;
    out.set_item("mean_solved_fraction", report.mean_solved_fraction)?;
    out.set_item("mean_jaccard", report.mean_jaccard)?;
    out.set_item("timeouts", report.timeouts)?;
    out.set_item("folds", folds)?;
    Ok(out)
}

/// (m_sbs - m_s) / (m_sbs - m_vbs).
#[pyfunction]
fn closed_gap(m_sbs: f64, m_s: f64, m_vbs: f64) -> PyResult<f64> {
    sunny_as2::metrics::closed_gap(m_sbs, m_s, m_vbs).map_err(err)
}

/// Pairwise Borda credit of time `t` against `t_other`.
#[pyfunction]
#[pyo3(signature = (t, t_other, cutoff, delta=0.0))]
fn cmp_delta(t: f64, t_other: f64, cutoff: f64, delta: f64) -> f64 {
    sunny_as2::metrics::cmp_delta(t, t_other, cutoff, delta)
}

/// Normalized Borda score of every selector; `times[s][i]` is selector `s` on instance `i`.
#[pyfunction]
#[pyo3(signature = (times, cutoff, delta=0.0))]
fn borda(times: Vec<Vec<f64>>, cutoff: f64, delta: f64) -> PyResult<Vec<f64>> {
    sunny_as2::metrics::borda_table(&times, cutoff, delta).map_err(err)
}

#[pyfunction]
fn jaccard(a: Vec<usize>, b: Vec<usize>) -> f64 {
    sunny_as2::analysis::jaccard(&a, &b)
}

#[pymodule]
#[pyo3(name = "sunny_as2")]
fn sunny_as2_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<TrainingConfig>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(closed_gap, m)?)?;
    m.add_function(wrap_pyfunction!(cmp_delta, m)?)?;
    m.add_function(wrap_pyfunction!(borda, m)?)?;
    m.add_function(wrap_pyfunction!(jaccard, m)?)?;
    Ok(())
}
