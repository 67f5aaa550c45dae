use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid size for {what}: {value}")]
    InvalidSize { what: &'static str, value: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("basis of {requested} states exceeds the configured cap of {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("detailed balance violated: residual {residual:e} exceeds {tolerance:e}")]
    DetailedBalance { residual: f64, tolerance: f64 },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    Solver { residual: f64, iterations: usize },

    #[error("gap vanishes at interior path point s = {s}")]
    Stall { s: f64 },

    #[error("norm drift {drift:e} exceeds tolerance; reduce the integrator step")]
    Accuracy { drift: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
