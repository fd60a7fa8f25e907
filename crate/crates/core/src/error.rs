use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CgfError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The truncated series carries too much mass beyond its last coefficient.
    #[error("insufficient truncation: tail mass {tail_mass:e} at k_max = {k_max}; raise k_max")]
    InsufficientTruncation { tail_mass: f64, k_max: usize },

    /// A computation would exceed a configured size limit.
    #[error("resource limit: {0}")]
    Resource(String),

    /// The requested geometric construction cannot be realized.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Inconsistent or unknown user-supplied parameters.
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CgfError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(CgfError::Domain(msg.into()))
}
