use std::fmt;

use qread_core::Error;

/// A failed command, carrying its exit-code class.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Regime(String),
    Solver(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Regime(_) => 3,
            Failure::Solver(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) | Failure::Regime(m) | Failure::Solver(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParam { .. } | Error::Degenerate | Error::Config { .. } | Error::Infeasible(_) => {
                Failure::Config(msg)
            }
            Error::Quadrature { .. } | Error::Acausal(_) | Error::Coverage(_) | Error::Solver(_) => Failure::Solver(msg),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Solver(format!("write failed: {e}"))
    }
}
