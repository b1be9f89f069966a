use alloc::string::String;
use core::fmt;

/// Errors reported by the analytic models and the Fock-space engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument is out of range or malformed.
    Argument(String),
    /// The request exceeds a hard size limit.
    Capacity { requested: usize, limit: usize },
    /// A documented precondition does not hold.
    Precondition(String),
    /// The operation is not defined for this kind of state or schedule.
    UnsupportedState(String),
    /// The Fock truncation is too small for the request.
    Truncation { required: usize, actual: usize },
    /// The input lies outside the domain where the quantity is defined.
    Domain(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Argument(m) => write!(f, "invalid argument: {m}"),
            Error::Capacity { requested, limit } => {
                write!(f, "capacity exceeded: requested {requested}, limit {limit}")
            }
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::UnsupportedState(m) => write!(f, "unsupported: {m}"),
            Error::Truncation { required, actual } => write!(
                f,
                "Fock truncation too small: dimension {actual}, at least {required} required"
            ),
            Error::Domain(m) => write!(f, "outside domain: {m}"),
        }
    }
}

impl core::error::Error for Error {}
