//! Error type shared by every analytic module.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested quantity is undefined in the declared load regime.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// A root search failed to bracket or converge.
    #[error("root search failed: {0}")]
    RootSearch(String),

    /// An internal numerical check failed (truncation, invariant violation).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn regime(msg: impl Into<String>) -> Self {
        Error::RegimeMismatch(msg.into())
    }

    pub fn root(msg: impl Into<String>) -> Self {
        Error::RootSearch(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
