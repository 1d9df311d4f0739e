use thiserror::Error;

/// Errors raised by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("integrand is not finite at {at}")]
    NonFiniteSample { at: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{value} lies outside the domain {domain}")]
    DomainViolation { value: f64, domain: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown generator family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("Legendre conjugate unavailable: {0}")]
    ConjugateUnavailable(String),
    #[error("gradient image value {0} cannot be inverted")]
    InversionFailure(f64),
    #[error("invalid production function: {0}")]
    InvalidSpec(String),
    #[error("zero denominator in ratio of partial derivatives")]
    ZeroDenominator,
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("aggregator is not concave at the solution; request the convex (flipped) program")]
    NonConcave,
    #[error("target output {0} is not attainable")]
    InfeasibleTarget(f64),
    #[error("bundle is off the expansion path (residual {0:e})")]
    NotOnPath(f64),
    #[error("degenerate ratio: {0}")]
    DegenerateRatio(String),
}

impl Error {
    pub(crate) fn domain(value: f64, domain: impl ToString) -> Self {
        Error::DomainViolation {
            value,
            domain: domain.to_string(),
        }
    }

    /// Coarse failure class, used by front-ends to map errors to exit codes.
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::DomainViolation { .. }
            | Error::InversionFailure(_)
            | Error::NonFiniteSample { .. }
            | Error::InfeasibleTarget(_)
            | Error::NotOnPath(_)
            | Error::DegenerateRatio(_)
            | Error::ZeroDenominator => ErrorClass::Domain,
            Error::NoBracket { .. }
            | Error::NoConvergence { .. }
            | Error::NoSolution(_)
            | Error::NumericalBreakdown(_)
            | Error::ConjugateUnavailable(_)
            | Error::NonConcave => ErrorClass::NoConvergence,
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::UnknownFamily(_)
            | Error::InvalidParams(_)
            | Error::InvalidSpec(_) => ErrorClass::Config,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Domain,
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
