use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by space construction and the numerical operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: point {to} is unreachable from point {from}")]
    Disconnected { from: usize, to: usize },

    #[error("edge ({a}, {b}) has nonpositive or non-finite length {length}")]
    BadEdgeLength { a: usize, b: usize, length: f64 },

    #[error("edge ({a}, {b}) is a self-loop")]
    SelfLoop { a: usize, b: usize },

    #[error("point index {index} out of range for a space with {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("measure has length {got}, expected {expected}")]
    MeasureLength { expected: usize, got: usize },

    #[error("measure weights must be finite, nonnegative and not all zero")]
    BadMeasure,

    #[error("field has {got} values but the space has {expected} points")]
    FieldLength { expected: usize, got: usize },

    #[error("field contains a non-finite value at point {index}")]
    NonFiniteField { index: usize },

    #[error("field belongs to space {field} but was used with space {space}")]
    SpaceMismatch { field: String, space: String },

    #[error("point {0} has no neighbors")]
    IsolatedPoint(usize),

    #[error("ball of radius {radius} around point {center} has zero measure")]
    EmptyBall { center: usize, radius: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{0}")]
    Degenerate(String),

    #[error("transport solver did not converge after {0} pivots")]
    SolverStalled(usize),

    #[error("cannot read or write {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed space file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
