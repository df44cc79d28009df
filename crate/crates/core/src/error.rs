use thiserror::Error;

/// Errors raised by the library layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("entry {index} is not finite")]
    NonFinite { index: usize },

    #[error("entry {index} has negative mass {value}")]
    NegativeMass { index: usize, value: f64 },

    #[error("entries sum to {sum}, outside the accepted normalization window")]
    BadNormalization { sum: f64 },

    #[error("distributions over {left} and {right} bits cannot be compared")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector has {found} nonzero entries, at most {max} allowed")]
    SparsityViolation { found: usize, max: usize },

    #[error("invalid sparse distribution: {0}")]
    InvalidSparse(String),

    #[error("mass {0} is outside [0, 1]")]
    MassOutOfRange(f64),

    #[error("outcome {outcome} does not fit in {bits} bits")]
    OutcomeOutOfRange { outcome: usize, bits: usize },

    #[error("multiplicities sum to {total}, expected {expected}")]
    InconsistentCounts { total: u64, expected: u64 },

    #[error("{requested} qubits requested, limit is {max}")]
    TooManyQubits { requested: usize, max: usize },

    #[error("qubit {qubit} is not in a {qubits}-qubit register")]
    BadTarget { qubit: usize, qubits: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
