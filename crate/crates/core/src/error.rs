use thiserror::Error;

/// Errors raised by the walk, the special functions and the statistics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FbmError {
    #[error("Hurst index must lie strictly in (0, 1), got {0}")]
    HurstOutOfRange(f64),

    #[error("{function}: argument {value} outside the domain ({constraint})")]
    Domain {
        function: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{0} is not a point of the grid")]
    OffGrid(f64),

    #[error("reverse sum: lower limit {lower} exceeds upper limit {upper}")]
    ReverseSum { lower: i64, upper: i64 },

    #[error("grid point {index} outside the stream range [{first}, {end})")]
    OutsideStream { index: i64, first: i64, end: i64 },

    #[error("path collections must share one grid")]
    MismatchedGrids,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("covariance factorization failed after jitter {jitter:e}")]
    Factorization { jitter: f64 },

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, FbmError>;
