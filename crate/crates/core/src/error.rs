use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("domain violation: {0}")]
    Domain(String),

    /// The instance is too large for exhaustive enumeration.
    #[error("instance too large: {0}")]
    TooLarge(String),

    /// The branch-and-bound size cap was exceeded.
    #[error("solver cap exceeded: instance width {width} > cap {cap}")]
    CapExceeded { width: usize, cap: usize },

    /// A sampling loop hit its sample cap before reaching its coverage target.
    #[error("sample cap of {cap} reached before the stopping threshold")]
    SampleCap { cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by instance size rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::TooLarge(_) | Error::CapExceeded { .. } | Error::SampleCap { .. }
        )
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
