use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("slot {slot} out of range for rank-{rank} tensor")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("contracting two {0} slots needs a metric")]
    SameVariance(&'static str),
    #[error("variance mismatch: {0}")]
    VarianceMismatch(&'static str),
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("form degree {degree} invalid in dimension {dim}")]
    DegreeOutOfRange { degree: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("jet order {have} too low, {needed} required")]
    InsufficientJetOrder { needed: usize, have: usize },
    #[error("unknown catalog metric `{0}`")]
    UnknownMetric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("form is not closed (residual {residual:e})")]
    NotClosed { residual: f64 },
    #[error("solver stopped after {iterations} iterations with residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("Q is not constant at the base scale (oscillation {0:e})")]
    QNotConstant(f64),
    #[error("Möbius matrix is singular")]
    SingularMobius,
    #[error("odd form degree {0} has no invariant polynomial")]
    OddDegree(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
