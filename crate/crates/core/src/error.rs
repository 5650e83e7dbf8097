use thiserror::Error;

/// Errors raised by model construction, field evaluation and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("radius mismatch at junction: {left} vs {right}")]
    RadiusMismatch { left: f64, right: f64 },

    #[error("t = {t} lies outside the segment domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("warp is not twice differentiable at t = {0} (singular curvature)")]
    NotTwiceDifferentiable(f64),

    #[error("end is not a boundary end; no mean curvature is defined there")]
    NotABoundary,

    #[error("field does not match the model grid: {0}")]
    GridMismatch(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("constraint weights (a, b) = ({a}, {b}) are not admissible")]
    BadWeights { a: f64, b: f64 },

    #[error("constraint is unreachable: a = 0 on a model without boundary mass")]
    ConstraintUnreachable,

    #[error("zero field cannot be normalized")]
    ZeroField,

    #[error("covering unwrap is incompatible with the model topology: {0}")]
    IncompatibleCovering(String),

    #[error("model has no neck region")]
    NoNeck,

    #[error("slice position {t} lies outside the neck [{lo}, {hi}]")]
    SliceOutsideNeck { t: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
