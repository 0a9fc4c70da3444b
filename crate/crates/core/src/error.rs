//! Error type shared across the crate.

use alloc::string::String;
use core::fmt;

/// Errors produced by constructions and validators.
///
/// Every variant carries a human-readable detail string; the CLI surfaces
/// these verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    /// Ring or object parameters are out of range or mutually inconsistent.
    InvalidParams(String),
    /// An element or matrix does not live where the operation requires.
    InvalidInput(String),
    /// A construction's precondition fails (e.g. a non-injective `iota`
    /// where an embedding is required, or a filtration too shallow for the
    /// stable-lattice functor).
    PreconditionFailed(String),
    /// The stable-lattice functor was applied to an object whose filtration
    /// is not free over the length-`e` coefficient ring.
    NotReduced(String),
    /// A lookup or identification found no candidate.
    NoMatch(String),
    /// The digit word is the excluded one (constant `p - 1`), which
    /// indexes no class.
    ExcludedClass(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidParams(s) => write!(f, "invalid parameters: {s}"),
            CoreError::InvalidInput(s) => write!(f, "invalid input: {s}"),
            CoreError::PreconditionFailed(s) => write!(f, "precondition failed: {s}"),
            CoreError::NotReduced(s) => write!(f, "not reduced: {s}"),
            CoreError::NoMatch(s) => write!(f, "no match: {s}"),
            CoreError::ExcludedClass(s) => write!(f, "excluded class: {s}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, CoreError>;
