use thiserror::Error;

use crate::poly::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("{func}: argument {arg} outside the domain")]
    Domain { func: &'static str, arg: f64 },

    #[error("overflow in {context} (log-magnitude {log_magnitude:.3})")]
    Overflow { context: String, log_magnitude: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what}: truncation cap of {terms} terms reached (partial sum {partial:e})")]
    TruncationCap {
        what: &'static str,
        terms: usize,
        partial: f64,
    },

    #[error("quadrature did not converge: estimated error {achieved:e} > requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("invalid numeric context: {0}")]
    InvalidContext(String),

    #[error("linear algebra: {0}")]
    LinearAlgebra(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    pub(crate) fn overflow(context: impl Into<String>, log_magnitude: f64) -> Self {
        Error::Overflow {
            context: context.into(),
            log_magnitude,
        }
    }

    /// Overflow and truncation failures are "the numbers got too big", as
    /// opposed to caller mistakes.
    pub fn is_range_guard(&self) -> bool {
        matches!(self, Error::Overflow { .. } | Error::TruncationCap { .. })
    }
}
