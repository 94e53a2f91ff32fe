//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by context construction, arithmetic, and the special
/// functions built on top of them.
///
/// Precision-related variants carry the absolute precision that was
/// available when the operation had to give up, so callers can distinguish
/// "mathematically undefined" from "not enough digits to decide".
#[derive(Debug, Clone, Error)]
pub enum PadicError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree {0} is outside the supported range 1..=3")]
    UnsupportedDegree(usize),
    #[error("relative precision must be >= 1, got {0}")]
    BadPrecision(i64),
    #[error("modulus must be a monic polynomial of degree {expected}")]
    BadModulus { expected: usize },
    #[error("modulus is reducible mod {p} (root found at {root})")]
    ReducibleModulus { p: u64, root: u64 },
    #[error("values belong to different contexts")]
    ContextMismatch,
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("division by a value indistinguishable from zero (known only to O(p^{abs_prec}))")]
    DivisionByZero { abs_prec: i64 },
    #[error("valuation is indeterminate: only v >= {abs_prec} is certified")]
    IndeterminateValuation { abs_prec: i64 },
    #[error("operation requires v(x) >= 0, got v = {val}")]
    NegativeValuation { val: i64 },
    #[error("residue of x does not lie in the prime field F_p")]
    ResidueNotInPrimeField,
    #[error("expected a unit (v = 0), got v = {val}")]
    NotAUnit { val: i64 },
    #[error("logarithm of a value indistinguishable from zero (known only to O(p^{abs_prec}))")]
    LogOfZero { abs_prec: i64 },
    #[error("cannot certify that x lies outside Z_p at the available precision")]
    NotCertifiedOutsideZp,
    #[error("cannot certify membership of x in Z_p (certified only in base-field contexts with v >= 0)")]
    NotCertifiedInZp,
    #[error("lambda table of depth {have} cannot certify target precision {target} (tail bound {bound})")]
    LambdaTableTooShallow { have: usize, target: i64, bound: i64 },
    #[error("shift sequence hit an indeterminate regime at step {step}")]
    IndeterminateSequenceStep { step: usize },
    #[error("integrand evaluation failed at offset j = {j}: {source}")]
    Integrand {
        j: u64,
        #[source]
        source: Box<PadicError>,
    },
    #[error("invalid convergence policy: {0}")]
    BadPolicy(String),
    #[error("identity `{identity}` requires {requirement}")]
    RegimeMismatch {
        identity: &'static str,
        requirement: String,
    },
    #[error("identity `{identity}` requires argument `{arg}`")]
    MissingArgument {
        identity: &'static str,
        arg: &'static str,
    },
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
}

pub type Result<T> = std::result::Result<T, PadicError>;
