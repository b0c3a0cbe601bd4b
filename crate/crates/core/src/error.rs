//! Error taxonomy shared by the whole crate.
//!
//! Every fallible operation returns [`Error`]; the variants mirror the failure
//! classes callers need to distinguish (bad parameter values vs. bad data vs.
//! unsupported operations and so on). The CLI maps data/argument failures to
//! exit code 1 and convergence failures to exit code 2.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or prior received parameter values outside its domain.
    #[error("parameter error: {0}")]
    Param(String),

    /// An observation or evaluation point is invalid (NaN, wrong range, ...).
    #[error("input error: {0}")]
    Input(String),

    /// A specification string or structure could not be interpreted.
    #[error("spec error: {0}")]
    Spec(String),

    /// A dataset fails validation (empty, missing subjects, bad codes, ...).
    #[error("data error: {0}")]
    Data(String),

    /// A value violates a hard support boundary.
    #[error("boundary error: {0}")]
    Boundary(String),

    /// The sampler could not find a usable starting point.
    #[error("initialization error: {0}")]
    Init(String),

    /// The requested operation does not exist for this model kind.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Fits cannot be compared (mixed kinds, too few fits, ...).
    #[error("comparison error: {0}")]
    Comparison(String),

    /// A required argument is missing or inconsistent.
    #[error("argument error: {0}")]
    Argument(String),

    /// Convergence gate tripped (R-hat above the hard threshold).
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Filesystem failure while reading or writing artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
