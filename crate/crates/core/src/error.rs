use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    Domain(&'static str),
    /// Two operands have incompatible dimensions.
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// An iterative method hit its cap before meeting its tolerance.
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    /// A root could not be bracketed.
    Bracket { what: &'static str, lo: f64, hi: f64 },
    /// The requested configuration cannot be realized.
    Infeasible(&'static str),
    /// Input violates a documented precondition (e.g. non-unit-norm weights).
    Contract(&'static str),
    /// Not enough samples for the requested operation.
    Length { needed: usize, available: usize },
}

impl Error {
    /// True for failures of a numerical routine (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. } | Error::Bracket { .. })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Shape {
                what,
                expected,
                found,
            } => write!(f, "shape error in {what}: expected {expected}, found {found}"),
            Error::Convergence {
                what,
                iterations,
                residual,
            } => write!(
                f,
                "{what} did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::Bracket { what, lo, hi } => {
                write!(f, "{what}: root not bracketed in [{lo:e}, {hi:e}]")
            }
            Error::Infeasible(m) => write!(f, "infeasible: {m}"),
            Error::Contract(m) => write!(f, "contract violation: {m}"),
            Error::Length { needed, available } => {
                write!(f, "need {needed} samples, only {available} available")
            }
        }
    }
}

impl core::error::Error for Error {}
