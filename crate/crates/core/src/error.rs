use alloc::string::String;

/// Errors raised by the validation kernel.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("expected a finite argument, got {0}")]
    NonFinite(f64),
    #[error("sample is empty")]
    EmptySample,
    #[error("mean manual count is zero, relative differences are undefined")]
    DegenerateSample,
    #[error("need at least {needed} events, got {got}")]
    InsufficientSample { needed: usize, got: usize },
    #[error("sample mixes boarding and alighting events")]
    MixedDirections,
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("beta = 0.5 gives z(1 - beta) = 0, the normalized threshold divides by zero")]
    ZeroPowerQuantile,
    #[error("invalid design: {0}")]
    InvalidDesign(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
