use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sunny::Engine;

/// How prepared training instances are dealt into validation folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    Random,
    Stratified,
    Rank,
}

/// Which parameters are learned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearningMode {
    /// Only k, with all features.
    K,
    /// Only features, with the default k.
    F,
    /// Features and k together.
    Fk,
    /// Nothing: all features and the default k.
    None,
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(SplitMode::Random),
            "stratified" => Ok(SplitMode::Stratified),
            "rank" => Ok(SplitMode::Rank),
            other => Err(Error::InvalidArgument(format!(
                "unknown split mode `{other}`"
            ))),
        }
    }
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::Random => "random",
            SplitMode::Stratified => "stratified",
            SplitMode::Rank => "rank",
        })
    }
}

impl FromStr for LearningMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k" => Ok(LearningMode::K),
            "f" => Ok(LearningMode::F),
            "fk" => Ok(LearningMode::Fk),
            "none" => Ok(LearningMode::None),
            other => Err(Error::InvalidArgument(format!(
                "unknown learning mode `{other}`"
            ))),
        }
    }
}

impl fmt::Display for LearningMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LearningMode::K => "k",
            LearningMode::F => "f",
            LearningMode::Fk => "fk",
            LearningMode::None => "none",
        })
    }
}

/// Every knob of training and evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub split_mode: SplitMode,
    /// Maximum number of prepared training instances.
    pub instance_limit: usize,
    /// Maximum number of selected features.
    pub feature_limit: usize,
    /// Largest neighborhood size tried.
    pub k_max: usize,
    /// Maximum number of solvers picked by the greedy engine.
    pub schedule_limit: usize,
    pub seed: u64,
    /// Training time cap in seconds.
    pub time_cap: f64,
    pub learning_mode: LearningMode,
    pub engine_train: Engine,
    pub engine_test: Engine,
    pub outer_folds: usize,
    pub inner_folds: usize,
    pub repetitions: usize,
    /// PAR penalty used for scoring and for the backup solver.
    pub penalty: f64,
    pub charge_feature_cost: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            split_mode: SplitMode::Rank,
            instance_limit: 700,
            feature_limit: 5,
            k_max: 30,
            schedule_limit: 3,
            seed: 100,
            time_cap: 24.0 * 3600.0,
            learning_mode: LearningMode::Fk,
            engine_train: Engine::Greedy,
            engine_test: Engine::Greedy,
            outer_folds: 5,
            inner_folds: 10,
            repetitions: 5,
            penalty: 10.0,
            charge_feature_cost: true,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("invalid value `{value}` for `{key}`")))
}

fn positive(key: &str, value: &str) -> Result<usize> {
    let n: usize = parse(key, value)?;
    if n == 0 {
        return Err(Error::InvalidArgument(format!("`{key}` must be positive")));
    }
    Ok(n)
}

impl TrainingConfig {
    pub const KEYS: [&'static str; 15] = [
        "split_mode",
        "instance_limit",
        "feature_limit",
        "k_max",
        "schedule_limit",
        "seed",
        "time_cap",
        "learning_mode",
        "engine_train",
        "engine_test",
        "outer_folds",
        "inner_folds",
        "repetitions",
        "penalty",
        "charge_feature_cost",
    ];

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "split_mode" => self.split_mode = parse(key, value)?,
            "instance_limit" => self.instance_limit = positive(key, value)?,
            "feature_limit" => self.feature_limit = positive(key, value)?,
            "k_max" => self.k_max = positive(key, value)?,
            "schedule_limit" => self.schedule_limit = positive(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "time_cap" => {
                let t: f64 = parse(key, value)?;
                if !(t > 0.0) {
                    return Err(Error::InvalidArgument("`time_cap` must be positive".into()));
                }
                self.time_cap = t;
            }
            "learning_mode" => self.learning_mode = parse(key, value)?,
            "engine_train" => self.engine_train = parse(key, value)?,
            "engine_test" => self.engine_test = parse(key, value)?,
            "outer_folds" => self.outer_folds = positive(key, value)?,
            "inner_folds" => self.inner_folds = positive(key, value)?,
            "repetitions" => self.repetitions = positive(key, value)?,
            "penalty" => {
                let p: f64 = parse(key, value)?;
                if !(p >= 1.0) {
                    return Err(Error::InvalidArgument(
                        "`penalty` must be at least 1".into(),
                    ));
                }
                self.penalty = p;
            }
            "charge_feature_cost" => self.charge_feature_cost = parse(key, value)?,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown configuration key `{other}`"
                )))
            }
        }
        Ok(())
    }

    /// Applies a flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected `key = value`", n + 1))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = TrainingConfig::default();
        config.apply_text(text)?;
        Ok(config)
    }

    /// The configuration in the same flat format [`TrainingConfig::apply_text`] reads.
    pub fn to_text(&self) -> String {
        let values = [
            self.split_mode.to_string(),
            self.instance_limit.to_string(),
            self.feature_limit.to_string(),
            self.k_max.to_string(),
            self.schedule_limit.to_string(),
            self.seed.to_string(),
            self.time_cap.to_string(),
            self.learning_mode.to_string(),
            self.engine_train.to_string(),
            self.engine_test.to_string(),
            self.outer_folds.to_string(),
            self.inner_folds.to_string(),
            self.repetitions.to_string(),
            self.penalty.to_string(),
            self.charge_feature_cost.to_string(),
        ];
        Self::KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
