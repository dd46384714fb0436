use thiserror::Error;

/// Failures reported by the library.
///
/// Variants split into validation errors (bad parameters or inputs) and
/// numeric failures (quadrature or extrapolation did not settle); see
/// [`Error::is_numeric`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input has a non-integrable singular point at theta = {theta}")]
    NonIntegrableInput { theta: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e}) after {doublings} panel doublings")]
    QuadratureFailure {
        tol: f64,
        estimate: f64,
        doublings: u32,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("filter is undefined at theta = {theta}: {reason}")]
    UndefinedHere { theta: f64, reason: String },

    #[error("epsilon {eps} is below the grid spacing {spacing}")]
    EpsilonBelowResolution { eps: f64, spacing: f64 },

    #[error("extrapolation did not converge at {at}: successive corrections grow ({last:e} > {previous:e})")]
    NoConvergence { at: f64, last: f64, previous: f64 },

    #[error("boundary values diverge at theta = {theta} (last value {last:e})")]
    DivergenceDetected { theta: f64, last: f64 },

    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),

    #[error("bad parameters for `{name}`: {reason}")]
    BadParams { name: String, reason: String },

    #[error("no closed-form filtered version of `{0}`")]
    NotAvailable(String),

    #[error("{0} is outside the domain [{1}, {2}]")]
    OutOfDomain(f64, f64, f64),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::QuadratureFailure { .. }
                | Error::UndefinedHere { .. }
                | Error::NoConvergence { .. }
                | Error::DivergenceDetected { .. }
                | Error::NonIntegrableInput { .. }
        )
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
