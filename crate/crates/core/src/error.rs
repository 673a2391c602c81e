use alloc::string::String;
use core::fmt;

/// Crate-wide error type. Guard violations carry the configured limit so
/// callers can tell a hard precondition from a size cutoff they may raise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Input relation closes into a cycle (irreflexivity/antisymmetry broken).
    Cycle { a: usize, b: usize },
    /// An exhaustive routine was asked to run above its configured guard.
    SizeGuard {
        what: &'static str,
        limit: usize,
        got: usize,
    },
    /// Parameter outside its documented range.
    Range(&'static str),
    /// Operation requires a nonempty family.
    EmptyFamily,
    /// Catalog lookup failed.
    UnknownPoset(String),
    /// Malformed input (duplicate members, bad coordinates, unmet preconditions).
    InvalidInput(String),
    /// Internal partition consistency failure; must never fire.
    Cover(String),
    /// The constructed shifted copy failed re-verification; must never fire.
    SwapVerification(String),
    /// A container certificate invariant failed on an exhaustive check; must never fire.
    Verification(String),
    /// A persisted record could not be decoded.
    CorruptRecord { line: usize, msg: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Cycle { a, b } => write!(f, "relation is cyclic: {} < {} < {}", a, b, a),
            Error::SizeGuard { what, limit, got } => {
                write!(f, "size guard for {}: limit {}, got {}", what, limit, got)
            }
            Error::Range(what) => write!(f, "parameter out of range: {}", what),
            Error::EmptyFamily => write!(f, "family must be nonempty"),
            Error::UnknownPoset(name) => write!(f, "unknown catalog poset: {}", name),
            Error::InvalidInput(msg) => write!(f, "invalid input: {}", msg),
            Error::Cover(msg) => write!(f, "partition cover violated: {}", msg),
            Error::SwapVerification(msg) => write!(f, "shifted copy failed verification: {}", msg),
            Error::Verification(msg) => write!(f, "certificate verification failed: {}", msg),
            Error::CorruptRecord { line, msg } => {
                write!(f, "corrupt cache record at line {}: {}", line, msg)
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
