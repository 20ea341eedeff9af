use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {what} = {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("enumeration of {count} candidates exceeds the cap of {cap}")]
    CapExceeded { count: f64, cap: f64 },

    #[error("rate requirement cannot be met for device(s) {devices:?}")]
    Infeasible { devices: Vec<usize> },

    #[error("{what} did not converge within {iterations} iterations")]
    Convergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("absorption table line {line}: {message}")]
    Table { line: u64, message: String },

    #[error("frequency {frequency} Hz outside absorption table range [{min}, {max}]")]
    OutOfTableRange { frequency: f64, min: f64, max: f64 },
}

pub(crate) fn ensure_positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain { what, value })
    }
}

pub(crate) fn ensure_non_negative(what: &'static str, value: f64) -> Result<f64> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain { what, value })
    }
}
