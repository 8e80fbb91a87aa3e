//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the analysis and simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid SNR value {0}")]
    InvalidSnr(f64),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate}, error {error})")]
    NonConvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("no waterfall region: the first grid point already has FER < 1 (extend the grid to lower SNR)")]
    NoWaterfallRegion,

    #[error("no converged region: every grid point has FER = 1 (extend the grid to higher SNR)")]
    NoConvergedRegion,

    #[error("FER curve is empty")]
    EmptyCurve,

    #[error("FER level {0} is not bracketed by the curve")]
    LevelNotBracketed(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Numerical failures, as opposed to usage and validation errors.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::DegenerateInput(_)
                | Error::NoWaterfallRegion
                | Error::NoConvergedRegion
                | Error::LevelNotBracketed(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
