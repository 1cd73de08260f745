use thiserror::Error;

/// Errors raised while building or evaluating probability objects, bounds and codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative probability mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("all weights are zero")]
    ZeroMass,

    #[error("masses sum to {sum}, expected 1 within {tolerance}")]
    NotNormalized { sum: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{name} = {value} is out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("{what} needs {needed} entries, cap is {cap}")]
    CapExceeded { what: String, needed: u128, cap: u128 },

    #[error("alphabet is empty")]
    EmptyAlphabet,

    #[error("duplicate alphabet symbol {0:?}")]
    DuplicateSymbol(String),

    #[error("reference distribution is zero where the first argument has mass (index {index})")]
    SupportViolation { index: usize },

    #[error("no admissible threshold in hypothesis-testing divergence")]
    NoAdmissibleGamma,

    #[error("alpha = {0} must lie in (0, 1)")]
    AlphaOutOfRange(f64),

    #[error("alphabet of size {size} exceeds the limit {max} for {what}")]
    AlphabetTooLarge {
        what: &'static str,
        size: usize,
        max: usize,
    },

    #[error("stealth polytope is empty (best residual {residual:e})")]
    InfeasibleStealth { residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
