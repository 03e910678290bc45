use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    InvalidParameter { name: &'static str, reason: String },
    UnknownGame(String),
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A table that must be a probability distribution is not one.
    NotStochastic { what: &'static str, deviation: f64 },
    NotUnitary(f64),
    NotHermitian(f64),
    /// An exhaustive enumeration would exceed the configured cap.
    EnumerationCap {
        what: &'static str,
        count: Option<u64>,
        cap: u64,
        hint: &'static str,
    },
    /// A theorem's hypothesis was checked and does not hold.
    Hypothesis(String),
    Unsupported(String),
    EmptyVertexSet,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::UnknownGame(name) => write!(
                f,
                "unknown game `{name}` (expected `chsh`, `magic-square` or `mpp:<n>`)"
            ),
            Error::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected dimension {expected}, found {found}"),
            Error::NotStochastic { what, deviation } => {
                write!(f, "{what} is not a probability table (deviation {deviation:e})")
            }
            Error::NotUnitary(dev) => write!(f, "matrix is not unitary (max |UU†-I| = {dev:e})"),
            Error::NotHermitian(dev) => write!(f, "matrix is not Hermitian (max |A-A†| = {dev:e})"),
            Error::EnumerationCap {
                what,
                count,
                cap,
                hint,
            } => {
                match count {
                    Some(c) => write!(f, "refusing to enumerate {c} {what} (cap {cap})")?,
                    None => write!(f, "refusing to enumerate {what}: count overflows u64 (cap {cap})")?,
                }
                if !hint.is_empty() {
                    write!(f, "; {hint}")?;
                }
                Ok(())
            }
            Error::Hypothesis(msg) => write!(f, "hypothesis check failed: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::EmptyVertexSet => write!(f, "vertex set is empty"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
