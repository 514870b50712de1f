use thiserror::Error;

use crate::game::CoalitionStructure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration: agent count out of range, invalid distribution, bad schedule.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain of an operation (mask out of range, singleton split, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or invalid game input. `field` names the offending JSON path.
    #[error("parse error in `{field}`: {message}")]
    Parse { field: String, message: String },

    /// A coalition structure that overlaps or fails to cover the agent set.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// A problem too large for the requested solver.
    #[error("size error: {0}")]
    Size(String),

    /// Dimension mismatch between a register and a Hamiltonian.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// A split oracle failed mid-run. `partial` is the last valid structure.
    #[error("oracle `{oracle}` failed: {source}")]
    Oracle {
        oracle: String,
        #[source]
        source: Box<Error>,
        partial: Box<CoalitionStructure>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input rather than a solver failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Domain(_)
                | Error::Parse { .. }
                | Error::Invariant(_)
                | Error::Size(_)
                | Error::Dimension { .. }
        )
    }
}
