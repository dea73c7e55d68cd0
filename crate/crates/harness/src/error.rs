use thiserror::Error;

/// Failures surfaced by the harness, grouped by exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_) | HarnessError::Io { .. } => 3,
            HarnessError::Degenerate(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<fairdpp::Error> for HarnessError {
    fn from(e: fairdpp::Error) -> Self {
        use fairdpp::Error as E;
        match e {
            E::Degenerate { .. } => HarnessError::Degenerate(e.to_string()),
            E::InvalidDataset(_) => HarnessError::Data(e.to_string()),
            E::Domain(_) | E::InvalidQuota(_) | E::CapExceeded { .. } => {
                HarnessError::Config(e.to_string())
            }
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
