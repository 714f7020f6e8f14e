use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("unknown scheme `{name}`; available: {available}")]
    UnknownScheme { name: String, available: String },

    #[error("{what} = {value} is outside the admissible domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("step size h = {h} is unstable for scheme `{scheme}`")]
    Unstable { scheme: String, h: f64 },

    #[error("frequency index {index} (omega = {omega}) gives unstable step omega*h = {scaled}")]
    UnstableFrequency { index: usize, omega: f64, scaled: f64 },

    #[error("Richardson extrapolation did not converge: {0}")]
    Extrapolation(String),

    #[error("objective is not unimodal on the bracket; local minima near {minima:?}")]
    Bracket { minima: Vec<f64> },

    #[error("no multi-start solve converged: {0}")]
    NoConvergence(String),

    #[error("non-finite state at time-step {step}")]
    NonFinite { step: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("target `{0}` has no exact stationary sampler")]
    NoExactSampler(String),

    #[error("invalid target specification `{0}`")]
    TargetSpec(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
