use thiserror::Error;

/// Errors raised by the library. Each variant names the offending input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("element or subgroup does not belong to the group: {0}")]
    NotInGroup(String),
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("no complex conjugation set on the group")]
    NoConjugation,
    #[error("lattice containment fails; witness row {witness:?}")]
    NotContained { witness: Vec<String> },
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("prime {0} is not allowed here (odd prime required)")]
    BadPrime(u64),
    #[error("element is a zero divisor: {0}")]
    ZeroDivisor(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("quotient is not cyclic: {0}")]
    NotCyclic(String),
    #[error("invalid field data: {0}")]
    InvalidField(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("symbolic ideal cannot be evaluated: {0}")]
    Symbolic(String),
    #[error("p-local precision exhausted: {0}")]
    Precision(String),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
