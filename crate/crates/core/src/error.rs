use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading scenarios, learning models or writing reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing mandatory file {0}")]
    MissingFile(PathBuf),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("no runtime recorded for instance `{instance}` and algorithm `{algorithm}`")]
    MissingRun { instance: String, algorithm: String },

    #[error("no informative features: every feature is constant on the fitting set")]
    NoInformativeFeatures,

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("unknown instance `{0}`")]
    UnknownInstance(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("closed gap undefined: SBS score {m_sbs} does not exceed VBS score {m_vbs}")]
    UndefinedBaseline { m_sbs: f64, m_vbs: f64 },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
