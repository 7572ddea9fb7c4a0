use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("inverse of the deformation function did not converge for target {target}")]
    InversionFailure { target: f64 },

    #[error("deformation series has {available} odd coefficients, {required} are needed")]
    InsufficientSeriesOrder { required: usize, available: usize },

    #[error("series order {requested} exceeds the {available} available kinetic coefficients")]
    Order { requested: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid deformation: {0}")]
    InvalidSpec(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("aliasing: {0}")]
    Aliasing(String),

    #[error("state has zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("state and kernel were built for different deformations")]
    SpecMismatch,

    #[error("method mismatch: {0}")]
    MethodMismatch(String),

    #[error("numerical health check failed: {0}")]
    NumericalHealth(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
