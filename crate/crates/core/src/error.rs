use num::{BigInt, BigUint};
use thiserror::Error;

/// Errors raised by prefix validation, bound evaluation, scans, and tuple anchoring.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("prime and residue sequences differ in length ({primes} vs {residues})")]
    LengthMismatch { primes: usize, residues: usize },

    #[error("modulus {modulus} at index {index} is not prime")]
    NonPrimeModulus { index: usize, modulus: u64 },

    #[error("prime sequence decreases at index {index}: {current} after {previous}")]
    NotNonDecreasing {
        index: usize,
        previous: u64,
        current: u64,
    },

    #[error("residue {residue} at index {index} is not below its modulus {modulus}")]
    ResidueOutOfRange {
        index: usize,
        residue: u64,
        modulus: u64,
    },

    #[error("prime {prime} would carry {count} classes at index {index}; fewer than {prime} are allowed")]
    TooManyClassesForPrime {
        index: usize,
        prime: u64,
        count: u64,
    },

    #[error("class [{residue}]_{prime} at index {index} repeats index {first}")]
    DuplicateClass {
        index: usize,
        first: usize,
        prime: u64,
        residue: u64,
    },

    #[error("depth {depth} exceeds prefix length {len}")]
    IndexOutOfRange { depth: usize, len: usize },

    #[error(
        "bound denominator {denominator} for (alpha = {alpha}, kappa = {kappa}) is not positive"
    )]
    DegenerateDenominator {
        alpha: usize,
        kappa: u64,
        denominator: i128,
    },

    #[error("scan gave up after visiting {limit} positions in a single step")]
    ScanCapExceeded { limit: u64 },

    #[error("tuple {offsets:?} is not admissible")]
    NotAdmissible { offsets: Vec<i64> },

    #[error("tuple offsets must be non-empty and strictly increasing")]
    InvalidTuple,

    #[error("no matching position m with 0 < m < {primorial} exists for d = {d}")]
    NoMatchingPosition { d: usize, primorial: BigUint },

    #[error("m = {m} is not a matching position with 0 < m < {primorial} for d = {d}")]
    InvalidExplicitM {
        d: usize,
        m: BigUint,
        primorial: BigUint,
    },

    #[error(
        "anchor rejected: need p_d above both the diameter and k, \
         got d = {d} (p_d = {prime}), diameter = {diameter}, k = {k}"
    )]
    InvalidAnchor {
        d: usize,
        prime: u64,
        diameter: i64,
        k: usize,
    },

    #[error("position {position} is not congruent to m modulo the anchor primorial")]
    NotInResidueClass { position: BigInt },
}

pub type Result<T> = std::result::Result<T, Error>;
