use thiserror::Error;

use crate::space::Point;

/// Errors raised by space construction, set functionals, gauges and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {0} is not in the domain of the space or map")]
    PointOutOfDomain(Point),

    #[error("an enumeration grid is required for interval spaces")]
    GridRequired,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("ball radius must be non-negative (closed) or positive (open), got {0}")]
    NegativeRadius(f64),

    #[error("tail window is empty")]
    EmptyTail,

    #[error("matrix entry ({row}, {col}) is negative: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("matrix diagonal entry {index} is nonzero: {value}")]
    NonzeroDiagonal { index: usize, value: f64 },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("invalid interval bounds [{lo}, {hi}]")]
    InvalidBounds { lo: f64, hi: f64 },

    #[error("point set is empty")]
    EmptySet,

    #[error("gauge argument must be non-negative, got {0}")]
    NegativeArgument(f64),

    #[error("gauge table knots must be finite and strictly increasing")]
    InvalidKnots,

    #[error("ratio {0} is outside [0, 1)")]
    RatioOutOfRange(f64),

    #[error("image of {0} is empty")]
    EmptyImage(Point),

    #[error("no feasible successor")]
    NoFeasibleSuccessor,

    #[error("trace has {0} steps, at least 3 are required")]
    TraceTooShort(usize),

    #[error("variant {variant} requires {what}")]
    InvalidVariant { variant: String, what: String },

    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
