use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("matrix is indefinite (eigenvalue {eigenvalue:e})")]
    IndefiniteMatrix { eigenvalue: f64 },

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    #[error("no jumps of size >= {h} (empty tail)")]
    EmptyTail { h: f64 },

    #[error("small-jump covariance at h = {h} is singular on a non axis-aligned subspace")]
    DegenerateSmallJumps { h: f64 },

    /// The scheme produced a non-finite state. `level` and `sample` are filled
    /// in by the estimator when the failure happens inside a level run.
    #[error("non-finite state at t = {time} (level {level:?}, sample {sample:?})")]
    NonFiniteState {
        time: f64,
        level: Option<usize>,
        sample: Option<usize>,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tau = {tau} is too small for this schedule; minimal admissible tau is {min_tau}")]
    TauTooSmall { tau: f64, min_tau: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("realization does not match level parameters: {0}")]
    IncompatibleRealization(String),

    #[error("coefficient is not a registered constant field")]
    NotConstantCoefficient,

    #[error("payoff has no closed form here: {0}")]
    UnsupportedPayoff(String),

    #[error("configuration error: {0}")]
    Config(String),
}
