use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal precision loss: {0}")]
    Precision(String),

    #[error("failed to bracket zero of J_{order} of rank {rank} inside [{lo}, {hi}]")]
    RootFinding {
        order: usize,
        rank: usize,
        lo: f64,
        hi: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exponent overflow for {mode}: 2*lambda*T = {exponent:.3e}")]
    Overflow { mode: String, exponent: f64 },

    #[error("LP solver error: {0}")]
    Solver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
