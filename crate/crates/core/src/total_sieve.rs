//! Total sieves and their growth. A total sieve around a point is the maximal
//! run of sieved positions containing it, empty when the point is unsieved.
//! Deepening the prefix only grows the run, so an expanding series is computed
//! incrementally: each step re-checks the two boundary positions against the
//! single new class and otherwise scans only outward.

use num::{BigInt, BigRational, BigUint, One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::patterns::{rational_str, Pattern};
use crate::primes;
use crate::residues::{RegularParams, SievingPrefix};

/// Positions one scan step may visit before giving up.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

/// Caps on unbounded scans; valid prefixes guarantee termination, the cap
/// bounds the cost.
#[derive(Debug, Clone, Copy)]
pub struct ScanLimits {
    pub max_step_positions: u64,
}

impl Default for ScanLimits {
    fn default() -> Self {
        Self {
            max_step_positions: DEFAULT_STEP_CAP,
        }
    }
}

/// Maximal run of sieved positions around a point, or nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SieveInterval {
    Empty,
    Range { lo: BigInt, hi: BigInt },
}

impl SieveInterval {
    pub fn range(lo: i64, hi: i64) -> Self {
        Self::Range {
            lo: BigInt::from(lo),
            hi: BigInt::from(hi),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Self::Empty)
    }

    pub fn size(&self) -> BigUint {
        match self {
            Self::Empty => BigUint::zero(),
            Self::Range { lo, hi } => (hi - lo + BigInt::one())
                .to_biguint()
                .expect("interval endpoints are ordered"),
        }
    }
}

impl std::fmt::Display for SieveInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Empty => write!(f, "empty"),
            Self::Range { lo, hi } => write!(f, "[{}, {}]", lo, hi),
        }
    }
}

/// First unsieved position at or above `start`, at the given depth.
fn next_unsieved_up(
    prefix: &SievingPrefix,
    depth: usize,
    start: &BigInt,
    visited: &mut u64,
    cap: u64,
) -> Result<BigInt> {
    let mut pos = match start.to_i64() {
        Some(mut v) => {
            while v < i64::MAX {
                *visited += 1;
                if *visited > cap {
                    return Err(Error::ScanCapExceeded { limit: cap });
                }
                if !prefix.contains_i64_unchecked(depth, v) {
                    return Ok(BigInt::from(v));
                }
                v += 1;
            }
            BigInt::from(i64::MAX)
        }
        None => start.clone(),
    };
    loop {
        *visited += 1;
        if *visited > cap {
            return Err(Error::ScanCapExceeded { limit: cap });
        }
        if !prefix.contains_unchecked(depth, &pos) {
            return Ok(pos);
        }
        pos += 1;
    }
}

/// First unsieved position at or below `start`, at the given depth.
fn next_unsieved_down(
    prefix: &SievingPrefix,
    depth: usize,
    start: &BigInt,
    visited: &mut u64,
    cap: u64,
) -> Result<BigInt> {
    let mut pos = match start.to_i64() {
        Some(mut v) => {
            while v > i64::MIN {
                *visited += 1;
                if *visited > cap {
                    return Err(Error::ScanCapExceeded { limit: cap });
                }
                if !prefix.contains_i64_unchecked(depth, v) {
                    return Ok(BigInt::from(v));
                }
                v -= 1;
            }
            BigInt::from(i64::MIN)
        }
        None => start.clone(),
    };
    loop {
        *visited += 1;
        if *visited > cap {
            return Err(Error::ScanCapExceeded { limit: cap });
        }
        if !prefix.contains_unchecked(depth, &pos) {
            return Ok(pos);
        }
        pos -= 1;
    }
}

/// From-scratch bidirectional scan for the total sieve around `z`.
pub fn total_sieve_around(
    pattern: &Pattern,
    z: &BigInt,
    limits: ScanLimits,
) -> Result<SieveInterval> {
    let prefix = pattern.prefix();
    let depth = pattern.depth();
    if !prefix.contains_unchecked(depth, z) {
        return Ok(SieveInterval::Empty);
    }
    let mut visited = 0u64;
    let cap = limits.max_step_positions;
    let above = next_unsieved_up(prefix, depth, &(z + 1), &mut visited, cap)?;
    let below = next_unsieved_down(prefix, depth, &(z - 1), &mut visited, cap)?;
    Ok(SieveInterval::Range {
        lo: below + 1,
        hi: above - 1,
    })
}

fn serialize_rational<S: Serializer>(
    r: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational_str(r))
}

/// One growth-run row: the sieve size at depth n next to the exact bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub size: u64,
    #[serde(serialize_with = "serialize_rational")]
    pub beta_star: BigRational,
    #[serde(serialize_with = "serialize_rational")]
    pub gamma: BigRational,
    pub crossed: bool,
}

impl ExperimentRecord {
    pub fn csv_header() -> &'static str {
        "n,size,beta_star,gamma,crossed"
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n,
            self.size,
            rational_str(&self.beta_star),
            rational_str(&self.gamma),
            self.crossed
        )
    }
}

/// A full growth run around a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSeries {
    pub z: BigInt,
    pub rows: Vec<ExperimentRecord>,
}

impl GrowthSeries {
    /// Expands around `z` for depths 1..=n_max, bounds derived from the
    /// prefix's own density sequence.
    pub fn compute(
        prefix: &SievingPrefix,
        z: &BigInt,
        n_max: usize,
        limits: ScanLimits,
    ) -> Result<Self> {
        let bounds = BoundSeries::for_prefix(prefix, n_max)?;
        let rows: Result<Vec<ExperimentRecord>> =
            Expansion::new(prefix, &bounds, z.clone(), n_max, limits)?.collect();
        Ok(Self {
            z: z.clone(),
            rows: rows?,
        })
    }
}

/// Exact per-depth bounds: `gamma_n = 2n/D_n` and `beta*_n = 2 sum 1/D_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSeries {
    beta_star: Vec<BigRational>,
    gamma: Vec<BigRational>,
}

impl BoundSeries {
    /// Bounds from a prefix's density sequence, built incrementally: adding
    /// the n-th class of prime p (its c-th repeat) multiplies the density by
    /// `(p - c) / (p - c + 1)`.
    pub fn for_prefix(prefix: &SievingPrefix, n_max: usize) -> Result<Self> {
        prefix.check_depth(n_max)?;
        let mut beta_star = Vec::with_capacity(n_max);
        let mut gamma = Vec::with_capacity(n_max);
        let mut density = BigRational::one();
        let mut gap_sum = BigRational::zero();
        let two = BigRational::from_integer(BigInt::from(2));
        let mut run_start = 0usize;
        for n in 1..=n_max {
            let class = prefix.class(n - 1);
            if n >= 2 && prefix.class(n - 2).modulus != class.modulus {
                run_start = n - 1;
            }
            let repeats = (n - run_start) as u64;
            let p = class.modulus;
            density *= BigRational::new(BigInt::from(p - repeats), BigInt::from(p - repeats + 1));
            gap_sum += density.recip();
            beta_star.push(&two * &gap_sum);
            gamma.push(BigRational::from_integer(BigInt::from(2 * n as u64)) * density.recip());
        }
        Ok(Self { beta_star, gamma })
    }

    /// Bounds from the regular closed forms; identical to the prefix route
    /// for prefixes whose primes follow the (alpha, kappa) sequence.
    pub fn for_params(params: &RegularParams, n_max: usize) -> Result<Self> {
        let kappa = params.kappa;
        let oracle = primes::oracle();
        let mut beta_star = Vec::with_capacity(n_max);
        let mut gamma = Vec::with_capacity(n_max);
        let mut block = BigRational::one();
        let mut full_blocks = 0u64;
        let mut gap_sum = BigRational::zero();
        let two = BigRational::from_integer(BigInt::from(2));
        for n in 1..=n_max as u64 {
            let q = n / kappa;
            let s = n - q * kappa;
            while full_blocks < q {
                let p = oracle.nth_prime(params.alpha + full_blocks as usize);
                let denominator = p as i128 - kappa as i128;
                if denominator <= 0 {
                    return Err(Error::DegenerateDenominator {
                        alpha: params.alpha,
                        kappa,
                        denominator,
                    });
                }
                block *= BigRational::new(BigInt::from(denominator), BigInt::from(p));
                full_blocks += 1;
            }
            let density = if s == 0 {
                block.clone()
            } else {
                let p = oracle.nth_prime(params.alpha + q as usize);
                let numerator = p as i128 - s as i128;
                if numerator <= 0 {
                    return Err(Error::DegenerateDenominator {
                        alpha: params.alpha,
                        kappa,
                        denominator: numerator,
                    });
                }
                &block * BigRational::new(BigInt::from(numerator), BigInt::from(p))
            };
            gap_sum += density.recip();
            beta_star.push(&two * &gap_sum);
            gamma.push(BigRational::from_integer(BigInt::from(2 * n)) * density.recip());
        }
        Ok(Self { beta_star, gamma })
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// beta*_n, n in 1..=len.
    pub fn beta_star(&self, n: usize) -> &BigRational {
        &self.beta_star[n - 1]
    }

    /// gamma_n, n in 1..=len.
    pub fn gamma(&self, n: usize) -> &BigRational {
        &self.gamma[n - 1]
    }
}

/// `gamma_n` by the literal closed-form product:
/// `2n p_{a+q} / (p_{a+q} - n + kq) * prod_{i<q} p_{a+i}/(p_{a+i} - k)`
/// with `q = floor(n/kappa)`. Equals `2n / D_n` exactly.
pub fn gamma_bound(params: &RegularParams, n: u64) -> Result<BigRational> {
    if n == 0 {
        return Ok(BigRational::zero());
    }
    let kappa = params.kappa;
    let q = n / kappa;
    let s = n - q * kappa;
    let oracle = primes::oracle();
    let p_q = oracle.nth_prime(params.alpha + q as usize);
    let lead_denominator = p_q as i128 - s as i128;
    if lead_denominator <= 0 {
        return Err(Error::DegenerateDenominator {
            alpha: params.alpha,
            kappa,
            denominator: lead_denominator,
        });
    }
    let mut value = BigRational::new(
        BigInt::from(2) * BigInt::from(n) * BigInt::from(p_q),
        BigInt::from(lead_denominator),
    );
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
        value *= BigRational::new(BigInt::from(p), BigInt::from(denominator));
    }
    Ok(value)
}

/// `beta*_n = 2 sum_{i=1}^n 1/D_i` from the regular closed forms.
pub fn beta_star(params: &RegularParams, n: u64) -> Result<BigRational> {
    if n == 0 {
        return Ok(BigRational::zero());
    }
    let series = BoundSeries::for_params(params, n as usize)?;
    Ok(series.beta_star(n as usize).clone())
}

enum IntervalState {
    Empty,
    Range { lo: BigInt, hi: BigInt },
}

/// Iterator over growth rows, one per depth. Each step re-checks the previous
/// boundary positions against the newly added class only; outward scans use
/// full-depth evaluation.
pub struct Expansion<'a> {
    prefix: &'a SievingPrefix,
    bounds: &'a BoundSeries,
    limits: ScanLimits,
    z: BigInt,
    n_max: usize,
    next_n: usize,
    state: IntervalState,
    last_sign: i8,
    failed: bool,
}

impl<'a> Expansion<'a> {
    pub fn new(
        prefix: &'a SievingPrefix,
        bounds: &'a BoundSeries,
        z: BigInt,
        n_max: usize,
        limits: ScanLimits,
    ) -> Result<Self> {
        prefix.check_depth(n_max)?;
        assert!(bounds.len() >= n_max, "bound series shorter than the run");
        Ok(Self {
            prefix,
            bounds,
            limits,
            z,
            n_max,
            next_n: 1,
            state: IntervalState::Empty,
            last_sign: 0,
            failed: false,
        })
    }

    /// The interval after the last produced row.
    pub fn interval(&self) -> SieveInterval {
        match &self.state {
            IntervalState::Empty => SieveInterval::Empty,
            IntervalState::Range { lo, hi } => SieveInterval::Range {
                lo: lo.clone(),
                hi: hi.clone(),
            },
        }
    }

    fn step(&mut self, n: usize) -> Result<u64> {
        let cap = self.limits.max_step_positions;
        let mut visited = 0u64;
        let new_class = self.prefix.class(n - 1);
        match &mut self.state {
            IntervalState::Empty => {
                visited += 1;
                if new_class.contains(&self.z) {
                    let above =
                        next_unsieved_up(self.prefix, n, &(&self.z + 1), &mut visited, cap)?;
                    let below =
                        next_unsieved_down(self.prefix, n, &(&self.z - 1), &mut visited, cap)?;
                    self.state = IntervalState::Range {
                        lo: below + 1,
                        hi: above - 1,
                    };
                }
            }
            IntervalState::Range { lo, hi } => {
                let right = &*hi + 1;
                visited += 1;
                if new_class.contains(&right) {
                    let above = next_unsieved_up(self.prefix, n, &(&right + 1), &mut visited, cap)?;
                    *hi = above - 1;
                }
                let left = &*lo - 1;
                visited += 1;
                if new_class.contains(&left) {
                    let below =
                        next_unsieved_down(self.prefix, n, &(&left - 1), &mut visited, cap)?;
                    *lo = below + 1;
                }
            }
        }
        let size = match &self.state {
            IntervalState::Empty => 0u64,
            IntervalState::Range { lo, hi } => (hi - lo + BigInt::one())
                .to_u64()
                .expect("sieve sizes stay within 64 bits under the scan caps"),
        };
        Ok(size)
    }
}

impl Iterator for Expansion<'_> {
    type Item = Result<ExperimentRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.next_n > self.n_max {
            return None;
        }
        let n = self.next_n;
        self.next_n += 1;
        let size = match self.step(n) {
            Ok(size) => size,
            Err(e) => {
                self.failed = true;
                return Some(Err(e));
            }
        };
        let gamma = self.bounds.gamma(n).clone();
        let beta_star = self.bounds.beta_star(n).clone();
        let sign = match BigRational::from_integer(BigInt::from(size)).cmp(&gamma) {
            std::cmp::Ordering::Less => -1i8,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        };
        let crossed = sign != 0 && self.last_sign != 0 && sign != self.last_sign;
        if sign != 0 {
            self.last_sign = sign;
        }
        Some(Ok(ExperimentRecord {
            n,
            size,
            beta_star,
            gamma,
            crossed,
        }))
    }
}

/// Which bound a crossing count is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Gamma,
    BetaStar,
}

/// Crossing summary of a growth run against one of its bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingStats {
    pub crossings: usize,
    pub last_crossing_n: Option<usize>,
    pub sign_profile: Vec<i8>,
}

/// A crossing at n means the sign of `size_n - bound_n` is nonzero and differs
/// from the last recorded nonzero sign. Zeros carry no sign.
pub fn crossing_stats(rows: &[ExperimentRecord], bound: BoundKind) -> CrossingStats {
    let mut crossings = 0usize;
    let mut last_crossing_n = None;
    let mut last_sign = 0i8;
    let mut sign_profile = Vec::with_capacity(rows.len());
    for row in rows {
        let bound_value = match bound {
            BoundKind::Gamma => &row.gamma,
            BoundKind::BetaStar => &row.beta_star,
        };
        let sign = match BigRational::from_integer(BigInt::from(row.size)).cmp(bound_value) {
            std::cmp::Ordering::Less => -1i8,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        };
        sign_profile.push(sign);
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                crossings += 1;
                last_crossing_n = Some(row.n);
            }
            last_sign = sign;
        }
    }
    CrossingStats {
        crossings,
        last_crossing_n,
        sign_profile,
    }
}
