use alloc::string::String;

/// Everything that can go wrong in the core library.
///
/// Variants split into input errors (bad arguments, malformed expressions)
/// and numerical errors (non-finite samples, vanishing norms); see
/// [`Error::is_numerical`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("argument {value} lies outside the domain [{lo}, {hi}]")]
    DomainViolation { value: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cutoff {cutoff} exceeds the stable basis order {limit}")]
    CutoffTooLarge { cutoff: usize, limit: usize },

    #[error("polynomial degree {degree} exceeds available order {available}")]
    DegreeOutOfRange { degree: usize, available: usize },

    #[error("division by zero while evaluating expression")]
    DivisionByZero,

    #[error("non-finite value {value} at (p, q) = ({p}, {q})")]
    NonFinite { p: f64, q: f64, value: f64 },

    #[error("norm is zero or non-finite ({0})")]
    BadNorm(f64),

    #[error("the amplitude norm diverges; distances are undefined")]
    DivergentNorm,

    #[error("all Schmidt weights are zero")]
    AllZeroWeights,

    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DivisionByZero
                | Error::NonFinite { .. }
                | Error::BadNorm(_)
                | Error::NoConvergence
        )
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
