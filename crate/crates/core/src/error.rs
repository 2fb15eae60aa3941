use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LdpError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty effective domain")]
    EmptyEffectiveDomain,

    #[error("outside effective domain")]
    OutsideEffectiveDomain,

    #[error("x0 outside gradient range or solver stall (best residual {best_residual:e} after {iterations} iterations)")]
    SolverStall { best_residual: f64, iterations: usize },

    #[error("empty conditioning set on grid")]
    EmptyConditioningSet,

    #[error("conditioning on rate-infinite set")]
    InfiniteConditioningRate,

    #[error("unsupported tilt direction")]
    UnsupportedTilt,

    #[error("model has no Y component")]
    NoYComponent,

    #[error("conditioning event unobserved; use the tilted method")]
    ConditioningEventUnobserved,

    #[error("overflow: every replica overflowed after rescaling")]
    Overflow,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, LdpError>;
