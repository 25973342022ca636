use thiserror::Error;

/// Errors raised by state construction, matrix assembly and time stepping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("negative temperature {value:e} J for species `{species}`")]
    NegativeTemperature { species: String, value: f64 },

    #[error("hard-sphere frequencies need a strictly positive temperature; species `{species}` has {value:e} J")]
    NonPositiveTemperature { species: String, value: f64 },

    #[error("hard-sphere collision frequencies are defined for d = 3 only (got d = {0})")]
    UnsupportedDimension(usize),

    #[error("Knudsen number must be positive and finite (got {0})")]
    InvalidKnudsen(f64),

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("singular linear system")]
    SingularMatrix,

    #[error("Picard iteration did not converge after {iterations} sweeps (last relative change {residual:e})")]
    PicardNonConvergence { iterations: usize, residual: f64 },

    #[error("iterate left the realizable set: {0}")]
    RealizabilityLost(String),

    #[error("step failed at t = {time:e}: {source}")]
    StepFailed { time: f64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
