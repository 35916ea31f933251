use thiserror::Error;

/// Errors raised by the sensitivity engine and its oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("lattice is empty")]
    EmptyLattice,

    #[error("the target is unobservable: summed coupling derivative is zero")]
    Unobservable,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integration did not converge: halving the step changed an entry by {change:e} (limit {limit:e})")]
    NotConverged { change: f64, limit: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && !value.is_nan() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be strictly positive, got {value}"),
        })
    }
}

pub(crate) fn positive_finite(name: &'static str, value: f64) -> Result<f64> {
    positive(name, value)?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "must be finite".into(),
        })
    }
}
