use thiserror::Error;

/// Errors raised by the numerical modules.
///
/// The variants are grouped so that a front end can map them onto exit
/// codes: [`Error::Parse`] and [`Error::InvalidParameter`] are configuration
/// problems, [`Error::Precondition`] is a violated mathematical precondition,
/// everything else is a numeric failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The value overflows the f64 range; the log-domain value is attached.
    #[error("value out of range at s = {s:e} (log f = {log_value:e})")]
    OutOfRange { s: f64, log_value: f64 },

    #[error("expression undefined at s = {s:e}: {reason}")]
    Undefined { s: f64, reason: String },

    #[error("integrand divergent at the origin: {0}")]
    DivergentAtOrigin(String),

    #[error("non-integrable tail: {0}")]
    NonIntegrableTail(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("integrator failure: {0}")]
    Integrator(String),

    #[error("simulation aborted: {0}")]
    Simulation(String),

    #[error("not a blow-up trajectory: {0}")]
    NotBlowup(String),

    #[error("no admissible points: {0}")]
    NoAdmissiblePoints(String),
}

impl Error {
    /// Coarse category used by front ends.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::InvalidParameter(_) => ErrorKind::Config,
            Error::Precondition(_)
            | Error::DivergentAtOrigin(_)
            | Error::NonIntegrableTail(_)
            | Error::NotBlowup(_)
            | Error::NoAdmissiblePoints(_) => ErrorKind::Precondition,
            _ => ErrorKind::Numeric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numeric,
    Precondition,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
