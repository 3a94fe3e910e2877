use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the matrix, optimizer, oracle, and schedule layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: shape mismatch, expected {expected:?}, got {got:?}")]
    Shape {
        op: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("matrix data length {got} does not match {rows}x{cols}")]
    InvalidData { rows: usize, cols: usize, got: usize },

    #[error("matrix dimensions must be positive, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("{0}: non-finite entry")]
    NonFinite(&'static str),

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eig:e}, largest {max_eig:e}")]
    NotPsd { min_eig: f64, max_eig: f64 },

    #[error("eigen-solver did not converge for a {rows}x{cols} matrix")]
    NoConvergence { rows: usize, cols: usize },

    #[error("negative power {power} of a singular matrix (eigenvalue {eigenvalue:e})")]
    Singular { power: f64, eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle does not provide {0}")]
    MissingCapability(&'static str),

    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("rate slope undefined: {0}")]
    UndefinedSlope(String),

    #[error("oracle failure: {0}")]
    Oracle(String),
}
