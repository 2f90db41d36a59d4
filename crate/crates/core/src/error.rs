use thiserror::Error;

/// Errors raised by grid construction, solvers and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("grid mismatch between {0}")]
    GridMismatch(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("singular tridiagonal system at time index {time_index} (row {row})")]
    SingularSystem { time_index: usize, row: usize },

    #[error("unknown manufactured profile `{0}`")]
    UnknownProfile(String),

    #[error("degenerate ladder: {0}")]
    DegenerateLadder(String),

    #[error("solver did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
