use thiserror::Error;

use crate::md::PartialRun;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite entry at coordinate {index}")]
    NonFinite { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("iteration budget of {max_iters} exhausted before the stopping rule was met")]
    BudgetExhausted {
        max_iters: usize,
        partial: Box<PartialRun>,
    },

    #[error(
        "constraint value {g_value} exceeds eps at iteration {iteration} with a zero subgradient; \
         the problem is infeasible at this tolerance"
    )]
    InfeasibleAtTolerance { iteration: usize, g_value: f64 },

    #[error("no productive step was taken")]
    EmptyProductiveSet,

    #[error("restart stage {stage} failed: {source}")]
    Stage {
        stage: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("inner solver budget exhausted; best lower estimate {lower_estimate}")]
    InnerBudgetExhausted { lower_estimate: f64 },

    #[error("trace corrupted: {0}")]
    TraceCorrupted(String),

    #[error("missing Lipschitz hint: {0}")]
    MissingLipschitz(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}
