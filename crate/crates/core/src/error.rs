use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("{what} did not converge (residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue or pivot {pivot:e})")]
    NotPositiveDefinite { pivot: f64 },

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("empirical matrix E[(JF)(JF)^T] is singular (smallest eigenvalue {smallest_eigenvalue:e})")]
    SingularEmpiricalMatrix { smallest_eigenvalue: f64 },

    #[error("density vanishes at grid node {index}")]
    ZeroDensityNode { index: usize },

    #[error("Bobkov-Gotze criterion is not finite")]
    DivergentCriterion,

    #[error("conditional probability is zero for an observed configuration")]
    ZeroConditional,

    #[error("tensorization denominator below 1e-14")]
    DegenerateDenominator,

    #[error("training loss diverged ({loss:e} at step {step})")]
    DivergedLoss { loss: f64, step: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("refusing to emit an empty result set")]
    EmptyRows,

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
