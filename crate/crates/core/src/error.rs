use alloc::string::String;
use alloc::vec::Vec;

use crate::estimator::TermRecord;

/// Errors raised by the core library.
///
/// Variants split into domain errors (bad input, numerically degenerate
/// states) and internal errors (consistency checks that should never fire).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {qubits} qubits is above the dense limit of {limit}")]
    Capacity { qubits: usize, limit: usize },

    #[error("degenerate ensemble: assembled norm {norm:e} is below tolerance")]
    DegenerateEnsemble { norm: f64 },

    #[error("unstable ratio: denominator estimate {denominator:e} is below 1e-6")]
    UnstableRatio {
        denominator: f64,
        breakdown: Vec<TermRecord>,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by invariant violations inside the library.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
