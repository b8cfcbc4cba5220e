use hawkes_core::HawkesError;

pub const USAGE: u8 = 2;
pub const DATA: u8 = 3;
pub const NUMERICAL: u8 = 4;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            error: anyhow::anyhow!(msg.into()),
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Failure {
            code: DATA,
            error: anyhow::anyhow!(msg.into()),
        }
    }

    /// Treats any failure as bad input, whatever its kind. Used when loading
    /// files, where e.g. an invalid parameter is a problem with the file.
    pub fn from_input(e: HawkesError, what: &std::path::Path) -> Self {
        Failure {
            code: DATA,
            error: anyhow::Error::new(e).context(format!("reading {}", what.display())),
        }
    }
}

impl From<HawkesError> for Failure {
    fn from(e: HawkesError) -> Self {
        let code = match e {
            HawkesError::Domain(_) => USAGE,
            HawkesError::Numerical(_) => NUMERICAL,
            HawkesError::Data(_) | HawkesError::Io { .. } | HawkesError::Format(_) => DATA,
        };
        Failure {
            code,
            error: anyhow::Error::new(e),
        }
    }
}
