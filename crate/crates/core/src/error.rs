use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what}: n = {n} exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("bit string of length {got} given to a function of length {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid bit string: {0}")]
    InvalidBitString(String),

    #[error("invalid fitness function: {0}")]
    InvalidFitness(String),

    #[error("state {state} has zero escape mass; the hitting-time system is singular")]
    SingularSystem { state: String },

    #[error("state {state} is optimal; point-wise drift is defined on non-optimal states only")]
    OptimalState { state: String },

    #[error("fitness function is not linear-like (condition {condition} fails)")]
    NotLinearLike { condition: u8 },

    #[error("drift bound c = {c} is not positive; the theorem does not apply")]
    NonPositiveDrift { c: f64 },

    #[error("invalid distance function: {0}")]
    InvalidDistance(String),

    #[error("formula domain error: {0}")]
    DomainError(String),

    #[error("invalid transition model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
