//! Sieving patterns: the characteristic function of the unsieved set at a
//! fixed depth, its exact fundamental period and average density, the closed
//! forms for regular parameter pairs, and the Eratosthenes pattern whose
//! window certifies primality of survivors.

use num::{BigInt, BigRational, BigUint, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::primes;
use crate::residues::{RegularParams, SievingPrefix};

/// Bit-vector materialization is refused above this many period positions.
pub const DEFAULT_BITMAP_CAP_BITS: u64 = 100_000_000;

/// A sieving pattern: 1 at positions outside the model spanned by the first
/// `depth` classes of a prefix, 0 at sieved positions. Evaluation is lazy
/// per-point; [`Pattern::period_bitmap`] materializes one period when small
/// enough.
#[derive(Debug, Clone)]
pub struct Pattern {
    prefix: SievingPrefix,
    depth: usize,
}

impl Pattern {
    pub fn new(prefix: SievingPrefix, depth: usize) -> Result<Self> {
        prefix.check_depth(depth)?;
        Ok(Self { prefix, depth })
    }

    /// Pattern using every class of the prefix.
    pub fn full(prefix: SievingPrefix) -> Self {
        let depth = prefix.len();
        Self { prefix, depth }
    }

    /// The pattern with zero residues for the first `n` primes.
    pub fn eratosthenes(n: usize) -> Self {
        let primes = primes::oracle().first_primes(n);
        let residues = vec![0u64; n];
        let prefix = SievingPrefix::new(&primes, &residues)
            .expect("zero residues on the first primes form a valid prefix");
        Self::full(prefix)
    }

    /// Same prefix at another depth.
    pub fn at_depth(&self, depth: usize) -> Result<Self> {
        Self::new(self.prefix.clone(), depth)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn prefix(&self) -> &SievingPrefix {
        &self.prefix
    }

    /// 1 if `z` is unsieved at this depth, else 0.
    pub fn eval(&self, z: &BigInt) -> u8 {
        if self.prefix.contains_unchecked(self.depth, z) {
            0
        } else {
            1
        }
    }

    #[inline]
    pub fn eval_i64(&self, z: i64) -> u8 {
        if self.prefix.contains_i64_unchecked(self.depth, z) {
            0
        } else {
            1
        }
    }

    /// Product of the distinct primes among the first `depth` moduli.
    pub fn fundamental_period(&self) -> BigUint {
        let mut period = BigUint::one();
        let mut last = 0u64;
        for class in &self.prefix.classes()[..self.depth] {
            if class.modulus != last {
                period *= BigUint::from(class.modulus);
                last = class.modulus;
            }
        }
        period
    }

    /// Exact mean of the pattern over one fundamental period: the product of
    /// `(p - c_p) / p` over the distinct primes, where `c_p` counts classes
    /// with modulus `p`.
    pub fn average_density(&self) -> Density {
        let mut value = BigRational::one();
        let mut i = 0;
        let classes = &self.prefix.classes()[..self.depth];
        while i < classes.len() {
            let p = classes[i].modulus;
            let mut j = i;
            while j < classes.len() && classes[j].modulus == p {
                j += 1;
            }
            let count = (j - i) as u64;
            value *= BigRational::new(BigInt::from(p - count), BigInt::from(p));
            i = j;
        }
        Density::new(value)
    }

    /// Pattern values over one period, positions 1..=T, while T fits in
    /// `cap_bits` bits.
    pub fn period_bitmap(&self, cap_bits: u64) -> Option<PeriodBitmap> {
        let period = self.fundamental_period().to_u64()?;
        if period > cap_bits {
            return None;
        }
        let words = vec![0u64; (period as usize).div_ceil(64)];
        let mut bitmap = PeriodBitmap { period, words };
        for class in &self.prefix.classes()[..self.depth] {
            let p = class.modulus;
            let first = if class.residue == 0 { p } else { class.residue };
            let mut z = first;
            while z <= period {
                bitmap.mark_sieved(z);
                z += p;
            }
        }
        Some(bitmap)
    }

    /// Unsieved positions in 1..=T, counted from a materialized period.
    pub fn unsieved_count_in_period(&self, cap_bits: u64) -> Option<u64> {
        self.period_bitmap(cap_bits)
            .map(|bitmap| bitmap.unsieved_count())
    }
}

/// One materialized period of a pattern; a set bit marks a sieved position.
pub struct PeriodBitmap {
    period: u64,
    words: Vec<u64>,
}

impl PeriodBitmap {
    pub fn period(&self) -> u64 {
        self.period
    }

    fn mark_sieved(&mut self, z: u64) {
        let bit = z - 1;
        self.words[(bit / 64) as usize] |= 1u64 << (bit % 64);
    }

    /// Pattern value at position `z` in 1..=period.
    pub fn is_unsieved(&self, z: u64) -> bool {
        debug_assert!(z >= 1 && z <= self.period);
        let bit = z - 1;
        self.words[(bit / 64) as usize] & (1u64 << (bit % 64)) == 0
    }

    pub fn unsieved_count(&self) -> u64 {
        let sieved: u64 = self.words.iter().map(|w| w.count_ones() as u64).sum();
        self.period - sieved
    }
}

/// Exact average value of a pattern, a reduced rational in [0, 1].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Density(BigRational);

impl Density {
    pub(crate) fn new(value: BigRational) -> Self {
        debug_assert!(!value.is_negative() && value <= BigRational::one());
        Self(value)
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    /// The sieved-side density 1 - D.
    pub fn complement(&self) -> BigRational {
        BigRational::one() - &self.0
    }

    /// Mean gap between unsieved positions, 1/D.
    pub fn mean_gap(&self) -> BigRational {
        assert!(
            !self.0.is_zero(),
            "valid prefixes keep the density positive"
        );
        self.0.recip()
    }
}

impl std::fmt::Display for Density {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", rational_str(&self.0))
    }
}

/// Canonical `p/q` rendering, denominator always present.
pub fn rational_str(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Closed-form fundamental period for regular parameters at the given depth:
/// the product of the first `ceil(depth/kappa)` primes from p_alpha on.
pub fn regular_period(params: &RegularParams, depth: usize) -> BigUint {
    let kappa = params.kappa as usize;
    let blocks = depth.div_ceil(kappa);
    let oracle = primes::oracle();
    let mut period = BigUint::one();
    for i in 0..blocks {
        period *= BigUint::from(oracle.nth_prime(params.alpha + i));
    }
    period
}

/// Closed-form density for regular parameters at the given depth:
/// `(1 - s/p_{alpha+q}) * prod_{i<q} (1 - kappa/p_{alpha+i})` with
/// `depth = kappa*q + s`. Fails when some factor is not positive, which
/// happens exactly when kappa reaches the prime it divides against.
pub fn regular_density(params: &RegularParams, depth: usize) -> Result<Density> {
    let kappa = params.kappa;
    let q = depth as u64 / kappa;
    let s = depth as u64 - kappa * q;
    let oracle = primes::oracle();

    let mut value = BigRational::one();
    for i in 0..q as usize {
        let p = oracle.nth_prime(params.alpha + i);
        let denominator = p as i128 - kappa as i128;
        if denominator <= 0 {
            return Err(Error::DegenerateDenominator {
                alpha: params.alpha,
                kappa,
                denominator,
            });
        }
        value *= BigRational::new(BigInt::from(denominator), BigInt::from(p));
    }
    if s > 0 {
        let p = oracle.nth_prime(params.alpha + q as usize);
        let numerator = p as i128 - s as i128;
        if numerator <= 0 {
            return Err(Error::DegenerateDenominator {
                alpha: params.alpha,
                kappa,
                denominator: numerator,
            });
        }
        value *= BigRational::new(BigInt::from(numerator), BigInt::from(p));
    }
    Ok(Density::new(value))
}

/// 1 iff `z` is divisible by none of the first `n` primes.
pub fn eratosthenes_eval(n: usize, z: &BigInt) -> u8 {
    if let Some(v) = z.to_i64() {
        return eratosthenes_eval_i64(n, v);
    }
    for p in primes::oracle().first_primes(n) {
        if (z % BigInt::from(p)).is_zero() {
            return 0;
        }
    }
    1
}

pub fn eratosthenes_eval_i64(n: usize, z: i64) -> u8 {
    for p in primes::oracle().first_primes(n) {
        if crate::residues::residue_of_i64(z, p) == 0 {
            return 0;
        }
    }
    1
}

/// The window on which survivors of the depth-n Eratosthenes pattern are
/// guaranteed prime: positions 2 through p_{n+1}^2 - 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EratosthenesWindow {
    pub n: usize,
    pub lo: u64,
    pub hi: u64,
}

impl EratosthenesWindow {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "the window needs at least one sieving prime");
        let next = primes::oracle().nth_prime(n + 1);
        Self {
            n,
            lo: 2,
            hi: next * next - 1,
        }
    }

    /// Unsieved positions inside the window.
    pub fn survivors(&self) -> Vec<u64> {
        let primes = primes::oracle().first_primes(self.n);
        (self.lo..=self.hi)
            .filter(|&z| primes.iter().all(|&p| z % p != 0))
            .collect()
    }
}
