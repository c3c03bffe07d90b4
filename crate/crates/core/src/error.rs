use thiserror::Error;

use crate::params::Regime;

/// Every failure the numerical routines can report.
///
/// [`Error::category`] gives the coarse machine-readable class used by the
/// command line front end for exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Validation(String),

    #[error("operation requires regime {expected}, got {actual:?}")]
    Regime { expected: &'static str, actual: Regime },

    #[error("shooting failed: {reason} (last bracket [{lo:e}, {hi:e}])")]
    Shooting { reason: String, lo: f64, hi: f64 },

    #[error("fiber structure: {0}")]
    Structure(String),

    #[error("no {branch} branch at mass {mass}: {reason}")]
    NoSuchBranch {
        branch: &'static str,
        mass: f64,
        reason: String,
    },

    #[error("gradient flow: {0}")]
    Flow(String),

    #[error("solver: {0}")]
    Solver(String),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Regime { .. } => "regime",
            Error::Shooting { .. } => "shooting",
            Error::Structure(_) => "structure",
            Error::NoSuchBranch { .. } => "no-such-branch",
            Error::Flow(_) => "flow",
            Error::Solver(_) => "solver",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
