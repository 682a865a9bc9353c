//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or argument violates a documented invariant.
    /// The message names the violated invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A quadrature did not reach the requested tolerance. Carries the
    /// partial value and the relative error actually achieved.
    #[error("quadrature did not converge: partial value {partial:.6e}, achieved relative error {achieved:.3e} (requested {requested:.3e})")]
    NonConvergence {
        partial: f64,
        achieved: f64,
        requested: f64,
    },

    /// An approximation was requested outside its validity regime.
    #[error("approximation regime violated: {0}")]
    RegimeViolation(String),

    /// A time series is too short or too coarsely sampled for the analysis.
    #[error("record too short or undersampled: {0}")]
    Undersampled(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
