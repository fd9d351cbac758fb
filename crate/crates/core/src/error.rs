//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Error`]. The variants mirror
//! the ways a desk-scale numerical run can go wrong: bad input dimensions or
//! parameters, a floating-point computation leaving the representable range,
//! a query outside the numerically reachable range of a transform, and an
//! iteration that did not converge within its budget.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: dimension mismatch, parameter out of its admissible set,
    /// malformed expression, and the like.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation produced a non-finite value or a quadrature failed to
    /// meet its tolerance. The message records where.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A query outside the numerically reachable range (e.g. inverting a
    /// transform below its working interval).
    #[error("range error: {0}")]
    Range(String),

    /// An iterative solver exhausted its budget. `trace` holds the tail of the
    /// convergence history for diagnosis.
    #[error("convergence failure: {what} (last residuals: {trace:?})")]
    Convergence { what: String, trace: Vec<f64> },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }

    pub fn convergence(what: impl Into<String>, trace: &[f64]) -> Self {
        let tail = trace.iter().rev().take(8).rev().copied().collect();
        Error::Convergence {
            what: what.into(),
            trace: tail,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
