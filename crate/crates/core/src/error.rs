use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter violates its documented range.
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Two transmit/receive elements (nearly) occupy the same point.
    #[error("array elements overlap: minimum Tx/Rx distance {min_distance:.3e} wavelengths")]
    CoincidentElements { min_distance: f64 },

    /// An input that must be nonzero was (numerically) zero.
    #[error("`{0}` must be nonzero")]
    ZeroInput(&'static str),

    #[error("dimension mismatch for `{what}`: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: String,
        found: String,
    },

    /// A weight vector that must be unit-norm is not.
    #[error("`{name}` is not unit-norm (norm {norm})")]
    NotUnitNorm { name: &'static str, norm: f64 },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn dims(what: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            what,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
