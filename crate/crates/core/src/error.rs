use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    Domain { what: &'static str, value: f64 },
    /// An index or argument is outside the supported range.
    Range {
        what: &'static str,
        value: f64,
        limit: f64,
    },
    /// The requested accuracy could not be reached.
    Accuracy { requested: f64, achieved: f64 },
    /// Not enough data points for a fit or a detector window.
    InsufficientData { needed: usize, got: usize },
    /// Zero total mass where a normalized moment was requested.
    UndefinedMoment,
    /// A stability scan reached its ceiling without detecting instability.
    ScanFailure { gamma: f64, s_max: f64 },
    /// A lattice description that cannot be realised.
    Grid(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} = {value} is outside its domain"),
            Error::Range { what, value, limit } => {
                write!(f, "{what} = {value} exceeds the supported limit {limit}")
            }
            Error::Accuracy {
                requested,
                achieved,
            } => write!(
                f,
                "requested accuracy {requested:e} not reached (achieved bound {achieved:e})"
            ),
            Error::InsufficientData { needed, got } => {
                write!(f, "need at least {needed} data points, got {got}")
            }
            Error::UndefinedMoment => f.write_str("field has zero total mass"),
            Error::ScanFailure { gamma, s_max } => write!(
                f,
                "no instability detected for gamma = {gamma} up to S = {s_max}"
            ),
            Error::Grid(msg) => write!(f, "invalid grid: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "gamma",
            value: gamma,
        })
    }
}

pub(crate) fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what, value })
    }
}
