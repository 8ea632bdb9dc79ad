use thiserror::Error;

/// Errors raised by parameter validation, the solvers and config parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("qubit and resonator frequencies coincide; the dispersive ratio is undefined")]
    Degenerate,

    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("quadrature did not reach tolerance (achieved error estimate {estimate:.3e})")]
    Quadrature { estimate: f64 },

    #[error("point outside the causal region (retarded time {0:.3e} s < 0)")]
    Acausal(f64),

    #[error("grid coverage: {0}")]
    Coverage(String),

    #[error("solver: {0}")]
    Solver(String),

    #[error("infeasible design: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam { name, reason: reason.into() }
}
