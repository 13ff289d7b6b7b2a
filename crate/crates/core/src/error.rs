use thiserror::Error;

/// Library-wide error type.
///
/// The three failure classes map onto distinct process exit codes in the
/// CLI, so callers can tell a bad input apart from a numerical breakdown
/// or an augmentation that ran out of retries.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition or invariant on the inputs was violated.
    #[error("validation error: {0}")]
    Validation(String),

    /// An algorithm failed numerically (non-convergence, bad pivot,
    /// divergence) on inputs that passed validation.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An augmentation exhausted its retry budget without producing an
    /// acceptable output.
    #[error("augmentation failure: {0}")]
    Augmentation(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn augmentation(msg: impl Into<String>) -> Self {
        Error::Augmentation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
