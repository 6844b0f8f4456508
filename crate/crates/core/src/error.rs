use alloc::string::String;

/// Errors raised by the core solver and calculators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("exponent p = {p} out of range for N = {dim}")]
    ExponentRange { p: f64, dim: usize },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field length {got} does not match grid with {expected} nodes")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("right-hand side is negative ({value}) at node {node}")]
    NegativeRhs { node: usize, value: f64 },

    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },

    #[error("invalid weight: {0}")]
    Weight(String),

    #[error("singular argument must be positive, got {0}")]
    SingularArgument(f64),

    #[error("xi = {xi} lies outside the admissible interval ]{lower}, {upper}[")]
    XiOutOfRange { xi: f64, lower: f64, upper: f64 },

    #[error("configuration is not admissible: {0}")]
    Inadmissible(String),

    #[error("regularization parameter eps = {0} must lie in ]0, 1[")]
    Epsilon(f64),

    #[error("envelope violation of {violation:e} at node {node}")]
    EnvelopeViolation { node: usize, violation: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
