use thiserror::Error;

/// Errors raised by the sampling, oracle and diagnostic routines.
///
/// Part indices carried by [`Error::Degenerate`] are zero-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid quotas: {0}")]
    InvalidQuota(String),

    #[error("degenerate instance{}: {reason}", part.map(|p| format!(" in part {p}")).unwrap_or_default())]
    Degenerate { part: Option<usize>, reason: String },

    #[error("refusing to enumerate {size} subsets, enumeration cap is {cap}")]
    CapExceeded { size: u128, cap: u128 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(part: Option<usize>, reason: impl Into<String>) -> Self {
        Error::Degenerate {
            part,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
