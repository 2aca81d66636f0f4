//! Error type shared by all operators in this crate.

use thiserror::Error;

/// Errors produced by grid construction, catalog sampling, quadrature, and
/// the operator estimators.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum FracError {
    #[error("unknown catalog family `{0}`")]
    UnknownFamily(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("functions live on different grids ({0})")]
    GridMismatch(String),

    #[error("weight is not strictly positive at {at}")]
    NonPositiveWeight { at: f64 },

    #[error("tail integral diverges: {0}")]
    DivergentTail(String),

    #[error("mollifier width {eps} is below the grid spacing {spacing}")]
    EpsilonTooSmall { eps: f64, spacing: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    #[error("interior window too narrow: {0}")]
    WindowTooNarrow(String),

    #[error("kernel is not nonincreasing on its support (at {at})")]
    KernelNotMonotone { at: f64 },

    #[error("input is not periodic on its grid (mismatch {mismatch:.3e})")]
    NonPeriodicInput { mismatch: f64 },

    #[error("weight product exceeded the cap {cap:.3e} at scale h = {scale:.3e}; not in class at this cap")]
    IntegralOverflow { cap: f64, scale: f64 },

    #[error("gamma is evaluated only on (-1,0) and (0,inf); got {0}")]
    PoleOrUnsupported(f64),

    #[error("fractional order must lie in (0,1); got {0}")]
    OrderOutOfRange(f64),

    #[error("kernel truncation budget exceeded: {0}")]
    TruncationBudgetExceeded(String),
}

pub type Result<T> = std::result::Result<T, FracError>;
