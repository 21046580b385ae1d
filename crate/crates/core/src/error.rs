use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, inconsistent inputs, malformed files.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The closed form requested does not hold for the given inputs.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("non-finite state at step {step} (index {index})")]
    NonFinite { step: usize, index: usize },

    #[error("divergence: {0}")]
    Diverged(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit status: 2 for configuration problems, 1 for numerical
    /// diagnostics and I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::NotApplicable(_) => 2,
            Error::NonFinite { .. } | Error::Diverged(_) | Error::Numerical(_) | Error::Io(_) => 1,
        }
    }
}
