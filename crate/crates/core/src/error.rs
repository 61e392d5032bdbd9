use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator, the analysis layer and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {constraint}")]
    InvalidParameter { field: String, constraint: String },

    #[error("unknown experiment `{name}`; valid experiments are: {}", valid.join(", "))]
    UnknownExperiment { name: String, valid: Vec<&'static str> },

    #[error("fit of model `{model}` did not converge (best residual norm {best_residual:.3e})")]
    FitFailed { model: String, best_residual: f64 },

    #[error("sweep grid is not uniformly spaced")]
    NonUniformGrid,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
