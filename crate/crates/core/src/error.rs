use thiserror::Error;

use crate::solver::RunReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point lies outside the domain of a distance generating function or divergence.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Computation(String),

    /// The caller asked for a violated constraint component at a point where none is violated.
    #[error("no constraint component exceeds eps = {eps} (max value {max_value})")]
    NoViolatedComponent { eps: f64, max_value: f64 },

    #[error("step budget of {limit} exhausted after {productive} productive steps")]
    BudgetExhausted {
        limit: usize,
        productive: usize,
        partial: Box<RunReport>,
    },

    #[error("offline comparator found no point with g(x) <= 0 in {iterations} iterations")]
    Infeasible { iterations: usize },

    #[error("trace is incomplete: {0}")]
    IncompleteTrace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} has non-finite entries"
        )))
    }
}
