use thiserror::Error;

/// Errors raised by the Hawkes toolkit.
///
/// The variants are grouped by the caller's likely remedy: `Domain` and
/// `Data` point at bad input, `Numerical` at an optimizer or sampler that
/// could not produce a usable answer, and `Io` at the filesystem.
#[derive(Debug, Error)]
pub enum HawkesError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document: {0}")]
    Format(String),
}

impl HawkesError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        HawkesError::Domain(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        HawkesError::Data(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        HawkesError::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, HawkesError>;
