use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid offset {offset} for n = {n}")]
    InvalidOffset { n: usize, offset: usize },

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("shape mismatch: expected length {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("reduced Jacobian is singular at iteration {iteration}")]
    SolverSingular { iteration: usize },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("outside theorem scope: {0}")]
    Scope(String),
}

/// Shape error unless `got == expected`.
pub fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape { expected, got })
    }
}
