use thiserror::Error;

use crate::poly::IntPolynomial;

/// Errors raised by the computational core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("the zero polynomial has no roots")]
    ZeroPolynomial,
    #[error("constant polynomial: degree must be at least 1")]
    DegreeZero,
    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },
    #[error("polynomial is reducible: factor {factor}")]
    Reducible { factor: IntPolynomial },
    #[error("precision exhausted at {bits} bits: {what}")]
    PrecisionExhausted { bits: u32, what: String },
    #[error("no real root greater than 1")]
    NoRealRootAboveOne,
    #[error("square-root reduction did not terminate after {steps} steps")]
    ReductionDidNotTerminate { steps: usize },
    #[error("budget exceeded: {required} digit strings requested, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("minimal polynomial is not monic")]
    NotMonic,
    #[error("number is not a Salem number")]
    NotSalem,
    #[error("residue coefficients overflow 64-bit storage at level {level}")]
    ResidueOverflow { level: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cache record is malformed: {0}")]
    CacheFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn precision(bits: u32, what: impl Into<String>) -> Self {
        Error::PrecisionExhausted { bits, what: what.into() }
    }
}
