//! A desk-scale laboratory for residue-class sieving: validated sieving
//! prefixes, exact pattern periods and densities, expanding total sieves with
//! their growth bounds, and anchored prime-tuple experiments.
//!
//! Everything numeric is exact. Positions are arbitrary-precision integers
//! (with transparent 64-bit fast paths), periods and primorials are big
//! unsigned integers, and every density or bound is a reduced rational.

pub mod error;
pub mod patterns;
pub mod primes;
pub mod residues;
pub mod total_sieve;
pub mod tuples;

pub use error::{Error, Result};
pub use patterns::{
    eratosthenes_eval, rational_str, regular_density, regular_period, Density, EratosthenesWindow,
    Pattern, PeriodBitmap, DEFAULT_BITMAP_CAP_BITS,
};
pub use residues::{RegularParams, ResidueClass, SievingPrefix};
pub use total_sieve::{
    beta_star, crossing_stats, gamma_bound, total_sieve_around, BoundKind, BoundSeries,
    CrossingStats, Expansion, ExperimentRecord, GrowthSeries, ScanLimits, SieveInterval,
    DEFAULT_STEP_CAP,
};
pub use tuples::{matching_positions, KTuple, ReducedClasses, Survivor, TupleAnchor};
