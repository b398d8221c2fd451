use thiserror::Error;

/// Errors raised by the transfer-operator pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("map is not uniformly expanding: min lift derivative {min_derivative} <= 1")]
    NotExpanding { min_derivative: f64 },

    #[error("inverse branch solve did not converge at x = {x} (branch {branch})")]
    NoConvergence { x: f64, branch: usize },

    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: i64, right: i64 },

    #[error("kick too large: eps * sup|X'| = {value} (limit {limit})")]
    KickTooLarge { value: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index range [{lo}, {hi}] exceeds window [{window_lo}, {window_hi}]")]
    WindowExceeded {
        lo: i64,
        hi: i64,
        window_lo: i64,
        window_hi: i64,
    },

    #[error("pullback did not converge: residual {residual:e} > tolerance {tolerance:e}")]
    NotConverged { residual: f64, tolerance: f64 },

    #[error("series tail bound {tail_bound:e} exceeds tolerance {tolerance:e}; need K >= {required_k}")]
    TailNotSmall {
        tail_bound: f64,
        tolerance: f64,
        required_k: usize,
    },

    #[error("no admissible block length M <= {limit}")]
    MNotFound { limit: usize },

    #[error("no admissible delta_star: {0}")]
    DeltaStarNotFound(String),

    #[error("map at index {index} has C2 distance {distance} > delta_star {delta_star}")]
    OutsideCertifiedClass {
        index: i64,
        distance: f64,
        delta_star: f64,
    },

    #[error("noise density is not uniformly positive (min sample {alpha})")]
    NoiseNotPositive { alpha: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
