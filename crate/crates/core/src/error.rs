use thiserror::Error;

/// Errors raised by the analytics, the numerics and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration error on line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("recovered CDF value {value} at {at} lies outside [-0.02, 1.02]")]
    CdfOutOfRange { at: f64, value: f64 },

    #[error("no bracket found: {0}")]
    BracketFailure(String),

    #[error("hole window radius {hole_window} does not cover base-station window {bs_window} plus R = {radius}")]
    WindowMismatch { bs_window: f64, hole_window: f64, radius: f64 },

    #[error("simulation window too small: {0}")]
    WindowTooSmall(String),

    #[error("optimization infeasible: {0}")]
    Infeasible(String),

    #[error("objective not monotone over the bracket: {0}")]
    NotMonotone(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
