use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("{what}: n = {n} exceeds the supported limit {limit}")]
    Capacity {
        what: &'static str,
        n: u32,
        limit: u32,
    },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("query budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        LabError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn capacity(what: &'static str, n: u32, limit: u32) -> Self {
        LabError::Capacity { what, n, limit }
    }
}

pub(crate) fn check_same_dim(left: u32, right: u32) -> Result<()> {
    if left != right {
        return Err(LabError::DimensionMismatch { left, right });
    }
    Ok(())
}
