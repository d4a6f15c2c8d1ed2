use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in `{field}`: expected {expected}, got {got}")]
    Dimension {
        field: String,
        expected: String,
        got: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The solution norm crossed the overflow guard; the integration has a
    /// finite escape time near `t_escape`.
    #[error("solution blew up (norm > {guard:e}) near t = {t_escape:.4}")]
    BlowUp { t_escape: f64, guard: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },

    #[error("step size fell below h_min = {h_min:e} at t = {t}")]
    StepSizeUnderflow { h_min: f64, t: f64 },

    #[error("time {t} outside trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    /// A named modelling assumption does not hold for the given data.
    #[error("assumption {name} fails: {detail}")]
    Assumption { name: &'static str, detail: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Re-labels an integrator blow-up as the failure of a named assumption.
    pub(crate) fn blowup_as(self, name: &'static str, what: &str) -> Error {
        match self {
            Error::BlowUp { t_escape, .. } => Error::Assumption {
                name,
                detail: format!("{what} escapes to infinity near t = {t_escape:.4}"),
            },
            other => other,
        }
    }
}
