use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every module.
///
/// The first group are input problems (bad shapes, out-of-range targets); the
/// second group are numerical failures on otherwise valid input.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two inputs that must have matching lengths do not.
    Dimension { expected: usize, found: usize },
    /// A value lies outside the mathematical domain of an operation.
    Domain(String),
    /// A target is outside the achievable range.
    Range(String),
    /// An operation's precondition on its input does not hold.
    Precondition(String),
    /// Structurally invalid configuration (grids, level counts, ...).
    Config(String),
    /// The object is in the wrong state for this operation.
    State(String),
    /// A non-finite intermediate survived stabilization.
    Overflow { theta: f64 },
    /// An iterative method exhausted its budget.
    NoConvergence(String),
    /// A quadrature failed its self-consistency check.
    Accuracy(String),
    /// A linear system could not be solved.
    Singular { step: usize },
    /// A failure at one point of a grid or horizon list.
    AtIndex { index: usize, source: Box<Error> },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        if let Error::AtIndex { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::Overflow { .. }
                | Error::NoConvergence(_)
                | Error::Accuracy(_)
                | Error::Singular { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Range(msg) => write!(f, "range error: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::State(msg) => write!(f, "invalid state: {msg}"),
            Error::Overflow { theta } => {
                write!(f, "non-finite value after log-sum-exp shift at theta = {theta}")
            }
            Error::NoConvergence(msg) => write!(f, "no convergence: {msg}"),
            Error::Accuracy(msg) => write!(f, "accuracy check failed: {msg}"),
            Error::Singular { step } => {
                write!(f, "singular tridiagonal system at time step {step}")
            }
            Error::AtIndex { index, source } => write!(f, "at index {index}: {source}"),
        }
    }
}

impl Error {
    pub(crate) fn at(index: usize) -> impl FnOnce(Error) -> Error {
        move |source| Error::AtIndex { index, source: Box::new(source) }
    }
}

impl core::error::Error for Error {}
