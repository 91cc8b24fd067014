//! Error type shared by all toolkit modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),

    #[error("the zero vector has no projective representative")]
    ZeroVector,

    #[error("coordinate {value} is out of range for F_{q}")]
    CoordinateOutOfRange { value: u64, q: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("duplicate point ({0}) in explicit point set")]
    DuplicatePoint(String),

    #[error("duplicate element {0} in coordinate set {1}")]
    DuplicateCoordinate(u64, usize),

    #[error("point set is empty")]
    EmptySet,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("bisector of two equal points is the whole plane")]
    EqualPoints,

    #[error("{what}: required budget {required} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("adjacency oracle is not symmetric at ({0}, {1})")]
    AsymmetricAdjacency(usize, usize),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("independent-set search exhausted {rounds} rounds; best size {best} < required {required}")]
    RoundLimitExceeded {
        rounds: u32,
        best: u64,
        required: u64,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
