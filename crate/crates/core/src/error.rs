use thiserror::Error;

/// Errors raised by the model, cycle and pump routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("position {z} is outside the model domain ({lo}, {hi})")]
    Domain { z: f64, lo: f64, hi: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("coupled solve did not converge at t = {t} (residual {residual:.3e})")]
    Convergence { t: f64, residual: f64 },

    #[error("non-finite value in the coupled solve at t = {t}")]
    NonFinite { t: f64 },

    #[error("series too short: need at least {needed}, got {got}")]
    TooShort { needed: f64, got: f64 },
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
