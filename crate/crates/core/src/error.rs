use thiserror::Error;

use crate::binding::Backend;

/// Errors raised by codebook, binding, memory and capacity operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VsaError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("operation requires order >= {required}, found {found}")]
    OrderTooLow { required: usize, found: usize },

    #[error("expected {expected:?} representation, found {found:?}")]
    BackendMismatch { expected: Backend, found: Backend },

    #[error("index {index} out of range for codebook of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("size guard exceeded: {what} = {value} > {limit}")]
    SizeGuard {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T, E = VsaError> = std::result::Result<T, E>;

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(VsaError::DimensionMismatch { expected, found })
    }
}
