//! Admissible tuples and their fate under deepening sieves. An anchored tuple
//! fixes (d, m) so that the instances at `m + (z-1)p_{d-1}#` survive the first
//! d-1 primes; sieving by the next g primes cancels coordinates z along
//! residue classes that reduce, through modular inverses, to a regular prefix
//! with alpha = d and kappa = k.

use num::{BigInt, BigUint, Integer, One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::patterns::{eratosthenes_eval, Pattern};
use crate::primes;
use crate::residues::{residue_of, residue_of_i64, RegularParams, ResidueClass, SievingPrefix};

/// Strictly increasing integer offsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KTuple {
    offsets: Vec<i64>,
}

impl KTuple {
    pub fn new(offsets: Vec<i64>) -> Result<Self> {
        if offsets.is_empty() || offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTuple);
        }
        Ok(Self { offsets })
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn k(&self) -> usize {
        self.offsets.len()
    }

    pub fn diameter(&self) -> i64 {
        self.offsets[self.offsets.len() - 1] - self.offsets[0]
    }

    /// No prime may have all its residue classes covered by the offsets.
    /// Primes above k can never be covered by k classes, so only p <= k is
    /// examined.
    pub fn is_admissible(&self) -> bool {
        for p in primes::oracle().primes_upto(self.k() as u64) {
            let mut seen = vec![false; p as usize];
            for &a in &self.offsets {
                seen[residue_of_i64(a, p) as usize] = true;
            }
            if seen.iter().all(|&covered| covered) {
                return false;
            }
        }
        true
    }
}

impl std::fmt::Display for KTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.offsets.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

const SHARD: i64 = 1 << 14;

/// Positions m in `[lo, hi]` where the pattern is 1 at every `m + a_i`.
/// The window is sharded across workers and merged in window order.
pub fn matching_positions(
    tuple: &KTuple,
    pattern: &Pattern,
    lo: &BigInt,
    hi: &BigInt,
) -> Vec<BigInt> {
    if lo > hi {
        return Vec::new();
    }
    if let (Some(lo), Some(hi)) = (lo.to_i64(), hi.to_i64()) {
        let within_i64 = hi.checked_add(*tuple.offsets().last().unwrap()).is_some()
            && lo.checked_add(tuple.offsets()[0]).is_some();
        if within_i64 {
            let mut shards = Vec::new();
            let mut start = lo;
            while start <= hi {
                let end = start.saturating_add(SHARD - 1).min(hi);
                shards.push((start, end));
                if end == hi {
                    break;
                }
                start = end + 1;
            }
            return shards
                .into_par_iter()
                .map(|(a, b)| {
                    let mut found = Vec::new();
                    for m in a..=b {
                        if tuple
                            .offsets()
                            .iter()
                            .all(|&off| pattern.eval_i64(m + off) == 1)
                        {
                            found.push(BigInt::from(m));
                        }
                    }
                    found
                })
                .collect::<Vec<_>>()
                .into_iter()
                .flatten()
                .collect();
        }
    }
    let mut found = Vec::new();
    let mut m = lo.clone();
    while &m <= hi {
        if tuple
            .offsets()
            .iter()
            .all(|&off| pattern.eval(&(&m + off)) == 1)
        {
            found.push(m.clone());
        }
        m += 1;
    }
    found
}

/// An admissible tuple anchored at (d, m): p_d exceeds both the diameter and
/// k, m sits in (0, p_{d-1}#), and the tuple matches the zero-residue pattern
/// of depth d-1 at m. All checked at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleAnchor {
    tuple: KTuple,
    d: usize,
    m: BigUint,
    primorial: BigUint,
}

impl TupleAnchor {
    /// Smallest valid d, smallest matching m.
    pub fn smallest(tuple: KTuple) -> Result<Self> {
        Self::choose(tuple, None, None)
    }

    /// Anchor with optional explicit d and m; both validated.
    pub fn choose(tuple: KTuple, d: Option<usize>, m: Option<BigUint>) -> Result<Self> {
        if !tuple.is_admissible() {
            return Err(Error::NotAdmissible {
                offsets: tuple.offsets().to_vec(),
            });
        }
        let oracle = primes::oracle();
        let diameter = tuple.diameter();
        let k = tuple.k();
        let valid = |d: usize| {
            if d < 2 {
                return Err(Error::InvalidAnchor {
                    d,
                    prime: 0,
                    diameter,
                    k,
                });
            }
            let prime = oracle.nth_prime(d);
            if prime as i128 > diameter as i128 && prime as u128 > k as u128 {
                Ok(prime)
            } else {
                Err(Error::InvalidAnchor {
                    d,
                    prime,
                    diameter,
                    k,
                })
            }
        };
        let d = match d {
            Some(d) => {
                valid(d)?;
                d
            }
            None => {
                let mut d = 2;
                while valid(d).is_err() {
                    d += 1;
                }
                d
            }
        };
        let primorial = oracle.primorial(d - 1);
        let m = match m {
            Some(m) => {
                if m.is_zero() || m >= primorial || !matches_at(&tuple, d - 1, &m) {
                    return Err(Error::InvalidExplicitM { d, m, primorial });
                }
                m
            }
            None => smallest_match(&tuple, d, &primorial)?,
        };
        Ok(Self {
            tuple,
            d,
            m,
            primorial,
        })
    }

    pub fn tuple(&self) -> &KTuple {
        &self.tuple
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> &BigUint {
        &self.m
    }

    /// p_{d-1}#, the stride of the anchored progression.
    pub fn primorial(&self) -> &BigUint {
        &self.primorial
    }

    /// 1 unless some p_v with v in d..=d+g-1 divides m + a_u + (z-1)p_{d-1}#.
    pub fn eval(&self, g: usize, z: &BigInt) -> u8 {
        let tables = self.sieve_tables(g);
        if let Some(v) = z.to_i64() {
            eval_tables_i64(&tables, v)
        } else {
            eval_tables(&tables, z)
        }
    }

    /// The cancelled coordinates as residue classes on z, prime-major and
    /// offset-minor: r_{u,v} = (1 - (m + a_u) * inv(p_{d-1}# mod p_v)) mod p_v.
    pub fn reduce(&self, g: usize) -> ReducedClasses {
        let oracle = primes::oracle();
        let mut classes = Vec::with_capacity(g * self.tuple.k());
        for j in 0..g {
            let p = oracle.nth_prime(self.d + j);
            let step = (&self.primorial % BigUint::from(p)).to_u64().unwrap();
            let inv = mod_inverse(step, p);
            let m_mod = (&self.m % BigUint::from(p)).to_u64().unwrap();
            for &a in self.tuple.offsets() {
                let base = (m_mod as i128 + a as i128).rem_euclid(p as i128) as u64;
                let twisted = (base as u128 * inv as u128 % p as u128) as u64;
                let residue = ((1 + p as u128 - twisted as u128) % p as u128) as u64;
                classes.push(ResidueClass {
                    residue,
                    modulus: p,
                });
            }
        }
        ReducedClasses {
            alpha: self.d,
            kappa: self.tuple.k(),
            classes,
        }
    }

    /// mu(z) = m + (z - 1) * p_{d-1}#, the position of coordinate z.
    pub fn mu(&self, z: &BigInt) -> BigInt {
        BigInt::from(self.m.clone()) + (z - 1) * BigInt::from(self.primorial.clone())
    }

    /// Inverse of mu; the position must lie in m + (Z)p_{d-1}#.
    pub fn mu_inverse(&self, position: &BigInt) -> Result<BigInt> {
        let stride = BigInt::from(self.primorial.clone());
        let (q, r) = (position - BigInt::from(self.m.clone())).div_mod_floor(&stride);
        if !r.is_zero() {
            return Err(Error::NotInResidueClass {
                position: position.clone(),
            });
        }
        Ok(q + 1)
    }

    /// Coordinate window `[z_start, floor((p_{d+n}^2 - m) / p_{d-1}#)]`;
    /// None when the upper end falls below z_start.
    pub fn z_window(&self, n: usize, z_start: &BigInt) -> Option<(BigInt, BigInt)> {
        let p = primes::oracle().nth_prime(self.d + n);
        let square = BigInt::from(p) * BigInt::from(p);
        let upper = (square - BigInt::from(self.m.clone()))
            .div_floor(&BigInt::from(self.primorial.clone()));
        if &upper < z_start {
            None
        } else {
            Some((z_start.clone(), upper))
        }
    }

    /// Window coordinates the depth-n sieve leaves uncancelled, restricted to
    /// instances lying entirely inside [2, p_{d+n}^2 - 1], each with a
    /// primality verdict for all its elements.
    pub fn survivors(&self, n: usize) -> Vec<Survivor> {
        let Some((lo, hi)) = self.z_window(n, &BigInt::one()) else {
            return Vec::new();
        };
        let oracle = primes::oracle();
        let p_end = oracle.nth_prime(self.d + n);
        let window_hi = BigInt::from(p_end) * BigInt::from(p_end) - 1;
        let tables = self.sieve_tables(n);
        let lo = lo.to_i64().expect("window coordinates fit i64");
        let hi = hi.to_i64().expect("window coordinates fit i64");

        let mut shards = Vec::new();
        let mut start = lo;
        while start <= hi {
            let end = start.saturating_add(SHARD - 1).min(hi);
            shards.push((start, end));
            if end == hi {
                break;
            }
            start = end + 1;
        }
        shards
            .into_par_iter()
            .map(|(a, b)| {
                let mut rows = Vec::new();
                for z in a..=b {
                    if eval_tables_i64(&tables, z) == 0 {
                        continue;
                    }
                    let position = self.mu(&BigInt::from(z));
                    let first = &position + self.tuple.offsets()[0];
                    let last = &position + *self.tuple.offsets().last().unwrap();
                    if first < BigInt::from(2) || last > window_hi {
                        continue;
                    }
                    let all_prime = self.tuple.offsets().iter().all(|&off| {
                        let element = (&position + off)
                            .to_u64()
                            .expect("survivor elements fit u64 at desk scale");
                        oracle.is_prime(element)
                    });
                    rows.push(Survivor {
                        z: BigInt::from(z),
                        position,
                        all_prime,
                    });
                }
                rows
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }

    fn sieve_tables(&self, g: usize) -> Vec<SieveTable> {
        let oracle = primes::oracle();
        (0..g)
            .map(|j| {
                let p = oracle.nth_prime(self.d + j);
                let step = (&self.primorial % BigUint::from(p)).to_u64().unwrap();
                let m_mod = (&self.m % BigUint::from(p)).to_u64().unwrap();
                let bases = self
                    .tuple
                    .offsets()
                    .iter()
                    .map(|&a| (m_mod as i128 + a as i128).rem_euclid(p as i128) as u64)
                    .collect();
                SieveTable { p, step, bases }
            })
            .collect()
    }
}

struct SieveTable {
    p: u64,
    step: u64,
    bases: Vec<u64>,
}

fn eval_tables_i64(tables: &[SieveTable], z: i64) -> u8 {
    for table in tables {
        let zm1 = (z as i128 - 1).rem_euclid(table.p as i128) as u64;
        for &base in &table.bases {
            if (base as u128 + zm1 as u128 * table.step as u128).is_multiple_of(table.p as u128) {
                return 0;
            }
        }
    }
    1
}

fn eval_tables(tables: &[SieveTable], z: &BigInt) -> u8 {
    for table in tables {
        let zm1 = residue_of(&(z - 1), table.p);
        for &base in &table.bases {
            if (base as u128 + zm1 as u128 * table.step as u128).is_multiple_of(table.p as u128) {
                return 0;
            }
        }
    }
    1
}

/// Whether the tuple matches the zero-residue pattern of the given depth at m.
fn matches_at(tuple: &KTuple, depth: usize, m: &BigUint) -> bool {
    let m = BigInt::from(m.clone());
    tuple
        .offsets()
        .iter()
        .all(|&a| eratosthenes_eval(depth, &(&m + a)) == 1)
}

/// Smallest m in (0, p_{d-1}#) at which the tuple matches depth d-1.
/// Linear in the primorial, which is the price of an explicit large d.
fn smallest_match(tuple: &KTuple, d: usize, primorial: &BigUint) -> Result<BigUint> {
    let depth = d - 1;
    let base_primes = primes::oracle().first_primes(depth);
    if let Some(limit) = primorial.to_u64() {
        'candidate: for m in 1..limit {
            for &a in tuple.offsets() {
                let pos = m as i128 + a as i128;
                for &p in &base_primes {
                    if pos.rem_euclid(p as i128) == 0 {
                        continue 'candidate;
                    }
                }
            }
            return Ok(BigUint::from(m));
        }
    } else {
        let mut m = BigUint::one();
        while &m < primorial {
            if matches_at(tuple, depth, &m) {
                return Ok(m);
            }
            m += 1u32;
        }
    }
    Err(Error::NoMatchingPosition {
        d,
        primorial: primorial.clone(),
    })
}

/// A surviving instance: coordinate, position, and whether every element is
/// prime by the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Survivor {
    pub z: BigInt,
    pub position: BigInt,
    pub all_prime: bool,
}

/// The reduced classes of an anchored tuple sieve, grouped k per prime in
/// prime-major, offset-minor order. Serializes as
/// `{"alpha":d,"kappa":k,"classes":[{"r":…,"p":…},…]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReducedClasses {
    pub alpha: usize,
    pub kappa: usize,
    pub classes: Vec<ResidueClass>,
}

impl ReducedClasses {
    pub fn params(&self) -> RegularParams {
        RegularParams::new(self.alpha, self.kappa as u64)
    }

    /// The classes as a validated prefix.
    pub fn to_prefix(&self) -> Result<SievingPrefix> {
        SievingPrefix::from_classes(&self.classes)
    }
}

/// Modular inverse by extended gcd; requires gcd(a, p) = 1.
pub(crate) fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "inverse requires a unit");
    if t < 0 {
        t += p as i128;
    }
    t as u64
}
