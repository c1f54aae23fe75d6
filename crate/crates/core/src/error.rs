use thiserror::Error;

/// Errors raised by grid construction, sampling and diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point {point:?} lies outside the grid box")]
    OutOfBox { point: Vec<f64> },

    #[error("ball (center {center:?}, radius {radius}) is not contained in the grid box")]
    BallOutsideBox { center: Vec<f64>, radius: f64 },

    #[error("radius {radius} is below the reliability floor {floor}")]
    RadiusBelowFloor { radius: f64, floor: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("field is singular at this point: {0}")]
    Singular(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("relaxation did not reach tolerance {tol:e} within {sweeps} sweeps (residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64, tol: f64 },

    #[error("free boundary is empty: {0}")]
    EmptyFreeBoundary(String),

    #[error("zero field")]
    ZeroField,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("trapping violated: {0}")]
    TrappingViolated(String),

    #[error("root not bracketed at {0:?}")]
    NotBracketed(Vec<f64>),
}

pub type Result<T> = std::result::Result<T, Error>;
