//! Residue classes, validated sieving prefixes, and membership in the model
//! they span. A prefix is the finite head of a sequence of classes
//! `[r_i]_{p_i}` with non-decreasing prime moduli; the model at depth n is the
//! union of the first n classes.

use num::{BigInt, Integer, ToPrimitive};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes;

/// A residue class `[r]_p` with prime modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ResidueClass {
    #[serde(rename = "r")]
    pub residue: u64,
    #[serde(rename = "p")]
    pub modulus: u64,
}

impl ResidueClass {
    /// Checks primality of the modulus and the residue range.
    pub fn new(residue: u64, modulus: u64) -> Result<Self> {
        if !primes::oracle().is_prime(modulus) {
            return Err(Error::NonPrimeModulus { index: 0, modulus });
        }
        if residue >= modulus {
            return Err(Error::ResidueOutOfRange {
                index: 0,
                residue,
                modulus,
            });
        }
        Ok(Self { residue, modulus })
    }

    pub fn contains(&self, z: &BigInt) -> bool {
        residue_of(z, self.modulus) == self.residue
    }

    pub fn contains_i64(&self, z: i64) -> bool {
        residue_of_i64(z, self.modulus) == self.residue
    }
}

impl std::fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}]_{}", self.residue, self.modulus)
    }
}

/// Non-negative residue of `z` modulo `p`.
pub(crate) fn residue_of(z: &BigInt, p: u64) -> u64 {
    if let Some(v) = z.to_i64() {
        return residue_of_i64(v, p);
    }
    z.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("floored residue fits the modulus")
}

pub(crate) fn residue_of_i64(z: i64, p: u64) -> u64 {
    if p > i64::MAX as u64 {
        return if z >= 0 {
            z as u64
        } else {
            p - z.unsigned_abs()
        };
    }
    let r = z % (p as i64);
    if r < 0 {
        (r + p as i64) as u64
    } else {
        r as u64
    }
}

/// A validated finite prefix of residue classes: prime moduli, non-decreasing,
/// residues below their moduli, fewer than `p` classes per prime `p`, no
/// repeated class. Validation happens once here; downstream evaluation assumes
/// it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SievingPrefix {
    classes: Vec<ResidueClass>,
}

impl SievingPrefix {
    /// Validates the four prefix constraints, reporting the first violation
    /// and its index.
    pub fn new(primes_seq: &[u64], residues_seq: &[u64]) -> Result<Self> {
        if primes_seq.len() != residues_seq.len() {
            return Err(Error::LengthMismatch {
                primes: primes_seq.len(),
                residues: residues_seq.len(),
            });
        }
        let oracle = primes::oracle();
        let mut classes = Vec::with_capacity(primes_seq.len());
        let mut run_start = 0usize;
        for (i, (&p, &r)) in primes_seq.iter().zip(residues_seq).enumerate() {
            if !oracle.is_prime(p) {
                return Err(Error::NonPrimeModulus {
                    index: i,
                    modulus: p,
                });
            }
            if i > 0 {
                let prev = primes_seq[i - 1];
                if p < prev {
                    return Err(Error::NotNonDecreasing {
                        index: i,
                        previous: prev,
                        current: p,
                    });
                }
                if p != prev {
                    run_start = i;
                }
            }
            if r >= p {
                return Err(Error::ResidueOutOfRange {
                    index: i,
                    residue: r,
                    modulus: p,
                });
            }
            let count = (i - run_start + 1) as u64;
            if count >= p {
                return Err(Error::TooManyClassesForPrime {
                    index: i,
                    prime: p,
                    count,
                });
            }
            if let Some(first) = (run_start..i).find(|&j| residues_seq[j] == r) {
                return Err(Error::DuplicateClass {
                    index: i,
                    first,
                    prime: p,
                    residue: r,
                });
            }
            classes.push(ResidueClass {
                residue: r,
                modulus: p,
            });
        }
        Ok(Self { classes })
    }

    /// The empty prefix; its model contains nothing.
    pub fn empty() -> Self {
        Self {
            classes: Vec::new(),
        }
    }

    pub fn from_classes(classes: &[ResidueClass]) -> Result<Self> {
        let primes: Vec<u64> = classes.iter().map(|c| c.modulus).collect();
        let residues: Vec<u64> = classes.iter().map(|c| c.residue).collect();
        Self::new(&primes, &residues)
    }

    /// A new prefix with the extra classes appended, re-validated as a whole.
    pub fn extended(&self, extra_primes: &[u64], extra_residues: &[u64]) -> Result<Self> {
        let mut primes: Vec<u64> = self.classes.iter().map(|c| c.modulus).collect();
        let mut residues: Vec<u64> = self.classes.iter().map(|c| c.residue).collect();
        primes.extend_from_slice(extra_primes);
        residues.extend_from_slice(extra_residues);
        Self::new(&primes, &residues)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[ResidueClass] {
        &self.classes
    }

    pub fn class(&self, index: usize) -> ResidueClass {
        self.classes[index]
    }

    /// Whether `z` lies in the model spanned by the first `depth` classes.
    pub fn contains(&self, depth: usize, z: &BigInt) -> Result<bool> {
        self.check_depth(depth)?;
        if let Some(v) = z.to_i64() {
            Ok(self.contains_i64_unchecked(depth, v))
        } else {
            Ok(self.classes[..depth].iter().any(|c| c.contains(z)))
        }
    }

    pub(crate) fn contains_unchecked(&self, depth: usize, z: &BigInt) -> bool {
        if let Some(v) = z.to_i64() {
            self.contains_i64_unchecked(depth, v)
        } else {
            self.classes[..depth].iter().any(|c| c.contains(z))
        }
    }

    #[inline]
    pub(crate) fn contains_i64_unchecked(&self, depth: usize, z: i64) -> bool {
        self.classes[..depth].iter().any(|c| c.contains_i64(z))
    }

    pub(crate) fn check_depth(&self, depth: usize) -> Result<()> {
        if depth > self.classes.len() {
            return Err(Error::IndexOutOfRange {
                depth,
                len: self.classes.len(),
            });
        }
        Ok(())
    }
}

/// Parameters of a regular prime sieving sequence: the i-th prime is
/// `p_{alpha + ceil(i/kappa) - 1}`, so each prime from p_alpha on repeats
/// kappa times. Well-formed parameters keep kappa below p_alpha; the
/// operations that depend on that bound check it where it bites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RegularParams {
    pub alpha: usize,
    pub kappa: u64,
}

impl RegularParams {
    pub fn new(alpha: usize, kappa: u64) -> Self {
        Self { alpha, kappa }
    }

    /// The i-th prime of the sequence, i >= 1.
    pub fn prime_at(&self, i: usize) -> u64 {
        assert!(i >= 1, "sequence indices start at 1");
        assert!(
            self.alpha >= 1 && self.kappa >= 1,
            "parameters are positive"
        );
        let block = i.div_ceil(self.kappa as usize);
        primes::oracle().nth_prime(self.alpha + block - 1)
    }

    /// The first `len` primes of the sequence.
    pub fn primes(&self, len: usize) -> Vec<u64> {
        (1..=len).map(|i| self.prime_at(i)).collect()
    }

    /// A validated prefix pairing this prime sequence with the given residues.
    pub fn prefix(&self, residues: &[u64]) -> Result<SievingPrefix> {
        SievingPrefix::new(&self.primes(residues.len()), residues)
    }

    /// A prefix with pseudorandom residues. The generator is fixed: a ChaCha8
    /// stream keyed by `seed`, with each residue drawn by unbiased 64-bit
    /// rejection sampling from the residues not yet used for its prime.
    pub fn seeded_prefix(&self, len: usize, seed: u64) -> Result<SievingPrefix> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let primes = self.primes(len);
        let mut residues = Vec::with_capacity(len);
        let mut used: Vec<u64> = Vec::new();
        for (i, &p) in primes.iter().enumerate() {
            if i > 0 && primes[i - 1] != p {
                used.clear();
            }
            if used.len() as u64 + 1 >= p {
                return Err(Error::TooManyClassesForPrime {
                    index: i,
                    prime: p,
                    count: used.len() as u64 + 1,
                });
            }
            let r = loop {
                let candidate = uniform_below(&mut rng, p);
                if !used.contains(&candidate) {
                    break candidate;
                }
            };
            used.push(r);
            residues.push(r);
        }
        SievingPrefix::new(&primes, &residues)
    }
}

/// Unbiased uniform draw from `[0, bound)` by rejection on the top of the
/// 64-bit range.
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let limit = u64::MAX - u64::MAX % bound;
    loop {
        let x = rng.next_u64();
        if x < limit {
            return x % bound;
        }
    }
}
