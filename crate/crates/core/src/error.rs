use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// An argument is outside the operation's domain.
    InvalidArgument(&'static str),
    /// A documented precondition does not hold.
    ContractViolation(&'static str),
    /// An iterative method failed to converge.
    NumericFailure(&'static str),
    /// The objective returned a non-finite value.
    EvaluationFailure { fes: u64 },
    /// A function error below the known optimum, i.e. a broken evaluator.
    ImpossibleValue { raw: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::ContractViolation(msg) => write!(f, "contract violation: {msg}"),
            Error::NumericFailure(msg) => write!(f, "numeric failure: {msg}"),
            Error::EvaluationFailure { fes } => {
                write!(f, "objective returned a non-finite value at evaluation {fes}")
            }
            Error::ImpossibleValue { raw } => {
                write!(f, "function error {raw:e} is below the known optimum")
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
