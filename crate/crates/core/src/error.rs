use thiserror::Error;

use crate::spectral::Wavevector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("multiplier breaks Hermitian compatibility at k = {0:?}")]
    NonHermitianMultiplier(Wavevector),
    #[error("nonzero horizontal mean (|f̂| = {magnitude:e} at k = {k:?})")]
    NonzeroHorizontalMean { k: Wavevector, magnitude: f64 },
    #[error("wavevector {0:?} is outside the retained set")]
    NotRetained(Wavevector),
    #[error("coefficients are not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("fractional order must be finite and nonnegative, got {0}")]
    NegativeOrder(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("Rayleigh number must be positive and finite, got {0}")]
    Rayleigh(f64),
    #[error("L must be positive and finite, got {0}")]
    Length(f64),
    #[error("time step must be positive and finite, got {0}")]
    TimeStep(f64),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Param(#[from] ParamError),
    /// Carries the last finite state so the caller can dump it.
    #[error("non-finite coefficient after step ending at t = {time}; dt is likely too large")]
    NonFinite { time: f64, last_good: Box<crate::evolution::SimState> },
    #[error("t_end = {t_end} precedes current time {time}")]
    EndBeforeStart { time: f64, t_end: f64 },
}

#[derive(Debug, Error)]
pub enum VerificationError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("value {value} at t = {time} is not positive; cannot fit a logarithm")]
    NonPositive { time: f64, value: f64 },
    #[error("grid {0}x{1}x{2} exceeds the dense oracle limit of 16^3")]
    GridTooLarge(usize, usize, usize),
    #[error("perturbation has zero norm")]
    ZeroPerturbation,
    #[error("non-finite entry `{column}` at t = {time}")]
    NonFinite { column: &'static str, time: f64 },
    #[error("{0}")]
    Precondition(String),
}
