use thiserror::Error;

/// Errors produced by the library.
///
/// `AccessDenied` is the distinguished ⊥ of predicate encryption: the key
/// does not match the ciphertext's identity, or a homomorphic evaluation
/// was attempted across distinct identities. It is deliberately separate
/// from `MalformedCiphertext`, which flags data that no honest party could
/// have produced.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("access denied (⊥)")]
    AccessDenied,

    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(&'static str),

    #[error("value is not a unit modulo N")]
    NotAUnit,

    #[error("ring element is not invertible (not in G_a)")]
    NotInvertible,

    #[error("argument must have Jacobi symbol +1")]
    SymbolNotPlusOne,

    #[error("modulus must be odd and at least 3")]
    InvalidModulus,

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("degenerate draw rejected")]
    DegenerateElement,

    #[error("rejection-sampling cap exceeded while {0}")]
    IterationCapExceeded(&'static str),

    #[error("prime search exhausted its attempt budget")]
    PrimeSearchExhausted,

    #[error("input length {actual} does not match circuit arity {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("mask scan exhausted: wrong attribute tag or corrupted data")]
    MaskScanExhausted,

    #[error("adversary protocol violation: {0}")]
    ProtocolViolation(&'static str),

    #[error("operation not supported by this scheme: {0}")]
    UnsupportedOperation(&'static str),

    #[error("modulus too large to enumerate")]
    EnumerationTooLarge,
}

pub type Result<T> = std::result::Result<T, Error>;
