use thiserror::Error;

/// Errors raised while building or evaluating a model.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("response function `{role}` has the wrong arity: {reason}")]
    Arity { role: &'static str, reason: String },
    #[error("domain error: {0}")]
    Domain(String),
}

/// Errors raised by the method-of-steps integrator and trajectory queries.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("invalid integration setup: {0}")]
    Setup(String),
    #[error("negativity violation at t = {time}: state ({x}, {y}, {z})")]
    Negativity { time: f64, x: f64, y: f64, z: f64 },
    #[error("non-finite state (blow-up) at t = {time}")]
    BlowUp { time: f64 },
    #[error("time {t} outside trajectory range [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Errors raised by the stability-analysis helpers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// Errors raised when loading scenario or model files.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown preset `{0}` (known: {1})")]
    UnknownPreset(String, String),
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
