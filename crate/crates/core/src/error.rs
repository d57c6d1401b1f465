use alloc::string::String;

use crate::hilbert::LevelId;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("exclusion radius {radius} infeasible: gave up after {attempts} rejected draws")]
    InfeasibleExclusion { radius: f64, attempts: usize },

    #[error("degenerate geometry: atoms {0} and {1} coincide")]
    DegenerateGeometry(usize, usize),

    #[error("basis dimension {dim} exceeds cap {cap}")]
    BasisTooLarge { dim: usize, cap: usize },

    #[error("level {0:?} is not part of the basis")]
    MissingLevel(LevelId),

    #[error("operator dimension {got} does not match basis dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("adaptive stepper failed to reach tolerance in segment {segment} at t = {time}")]
    Stiffness { segment: usize, time: f64 },

    #[error("phase undefined: amplitude magnitude {0:e} below threshold")]
    UndefinedPhase(f64),

    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    #[error("schedule compilation failed: residual {0:e}")]
    CompilationFailed(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
