//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid trap: {0}")]
    InvalidTrap(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point outside required region: {0}")]
    OutOfRegion(String),
    #[error("singular kernel: evaluation point coincides with the source")]
    SingularKernel,
    #[error("series did not converge within {n_max} terms (last term {last_term:e})")]
    NonConvergence { n_max: usize, last_term: f64 },
    #[error("finite-difference clearance violated: need {needed}, have {available}")]
    Clearance { needed: f64, available: f64 },
    #[error("gauge invalid: eps*d_c = {value} must lie in (0, 1)")]
    GaugeInvalid { value: f64 },
    #[error("time step too large: sqrt(2 D dt) = {step:e} must stay below eps*b/4 = {limit:e}")]
    StepTooLarge { step: f64, limit: f64 },
    #[error("slit traps (b = 0) are a zero-measure target; walkers cannot hit them")]
    SlitTrap,
}

pub type Result<T> = std::result::Result<T, Error>;
