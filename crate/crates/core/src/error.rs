use alloc::string::String;

/// Errors raised by the library. Each variant carries a human readable
/// description of the offending input.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A prior was built from parameters outside its valid range.
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    /// Arguments do not fit together (arity mismatch, out of range, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// An input failed a documented precondition, e.g. a non-monotone slice.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The object being evaluated is not a valid allocation/mechanism.
    #[error("model error: {0}")]
    Model(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
