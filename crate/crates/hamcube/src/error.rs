use thiserror::Error;

use crate::cube::Edge;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the library.
///
/// Precondition violations and malformed instances are reported to the
/// caller; `InternalInvariant` marks situations the underlying theory rules
/// out, so seeing one is always a bug.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed instance: {0}")]
    InvalidInstance(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("search budget exhausted after {explored} nodes")]
    BudgetExceeded { explored: u64 },

    /// The excluded configuration of the pinned spanning-pair operation:
    /// in dimension 3, with both endpoint pairs at distance 1 and the two
    /// edges at edge distance 2, no pair with a pinned first path exists.
    #[error("no spanning pair pins {xy} as a path edge against {uv} (dimension-3 exclusion)")]
    ExceptionalPair { xy: Edge, uv: Edge },

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("exception catalog mismatch: {0}")]
    CatalogMismatch(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::InternalInvariant(msg.into())
    }
}
