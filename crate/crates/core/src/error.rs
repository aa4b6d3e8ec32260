use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Validation(String),

    #[error("{0}")]
    Assumption(String),

    #[error("quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("grid under-resolved: {0}")]
    Resolution(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("no bound state for h = {kinetic}·p² + {lambda}·V")]
    NoBoundState { lambda: f64, kinetic: f64 },

    #[error("iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("outside enhanced-binding window: {0}")]
    OutsideWindow(String),
}

pub type Result<T> = std::result::Result<T, Error>;
