use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid size histogram: {0}")]
    InvalidHistogram(String),

    #[error("initial price solution is non-positive ({0}); check cost, subsidy and return parameters")]
    NonPositiveInitialPrice(f64),

    #[error("total sector collapse: no active farmer with land left")]
    SectorCollapse,

    #[error("land market invariant violated: leftover pool would become {0} ha")]
    NegativeLeftover(f64),

    #[error("at least one seed is required")]
    NoSeeds,

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("chart error: {0}")]
    Chart(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

impl ModelError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ModelError::Io {
            path: path.into(),
            source,
        }
    }
}
