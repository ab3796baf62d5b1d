//! Prime generation kept independent of the pattern machinery: a segmented
//! sieve, a shared cached oracle, and primorials. This module referees the
//! sieving experiments, so it deliberately shares no evaluation code with
//! [`crate::patterns`].

use std::sync::{OnceLock, RwLock};

use num::{BigUint, One};

/// All primes `<= limit` in ascending order, via a segmented sieve of
/// Eratosthenes with a 2^18-wide window.
pub fn primes_upto(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let root = limit.isqrt();
    let base = simple_sieve(root);
    let mut primes = base.clone();

    const SEGMENT: u64 = 1 << 18;
    let mut mark = vec![false; SEGMENT as usize];
    let mut lo = root + 1;
    while lo <= limit {
        let hi = lo.saturating_add(SEGMENT - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        mark[..len].fill(false);
        for &p in &base {
            let mut multiple = lo.div_ceil(p) * p;
            if multiple < p * p {
                multiple = p * p;
            }
            while multiple <= hi {
                mark[(multiple - lo) as usize] = true;
                match multiple.checked_add(p) {
                    Some(next) => multiple = next,
                    None => break,
                }
            }
        }
        for (i, flag) in mark[..len].iter().enumerate() {
            if !flag {
                primes.push(lo + i as u64);
            }
        }
        if hi == u64::MAX {
            break;
        }
        lo = hi + 1;
    }
    primes
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut p = 2usize;
    while p * p <= n {
        if !composite[p] {
            let mut q = p * p;
            while q <= n {
                composite[q] = true;
                q += p;
            }
        }
        p += 1;
    }
    (2..=n)
        .filter(|&i| !composite[i])
        .map(|i| i as u64)
        .collect()
}

struct Cache {
    covered: u64,
    primes: Vec<u64>,
}

/// Cached prime oracle. The cache only extends; every query returns exactly
/// what a fresh computation would.
pub struct PrimeOracle {
    cache: RwLock<Cache>,
}

impl PrimeOracle {
    pub fn new() -> Self {
        Self {
            cache: RwLock::new(Cache {
                covered: 1,
                primes: Vec::new(),
            }),
        }
    }

    /// Primes `<= limit`, ascending.
    pub fn primes_upto(&self, limit: u64) -> Vec<u64> {
        self.ensure_covered(limit);
        let cache = self.cache.read().unwrap();
        let end = cache.primes.partition_point(|&p| p <= limit);
        cache.primes[..end].to_vec()
    }

    /// The n-th prime, 1-indexed: `nth_prime(1) == 2`.
    pub fn nth_prime(&self, n: usize) -> u64 {
        assert!(n >= 1, "prime indices start at 1");
        loop {
            {
                let cache = self.cache.read().unwrap();
                if cache.primes.len() >= n {
                    return cache.primes[n - 1];
                }
            }
            let guess = nth_prime_upper_bound(n);
            let covered = self.cache.read().unwrap().covered;
            self.ensure_covered(guess.max(covered.saturating_mul(2)));
        }
    }

    /// Deterministic primality by trial division against sieved primes.
    pub fn is_prime(&self, n: u64) -> bool {
        if n < 2 {
            return false;
        }
        {
            let cache = self.cache.read().unwrap();
            if n <= cache.covered {
                return cache.primes.binary_search(&n).is_ok();
            }
        }
        let root = n.isqrt();
        self.ensure_covered(root);
        let cache = self.cache.read().unwrap();
        for &p in &cache.primes {
            if p > root {
                break;
            }
            if n.is_multiple_of(p) {
                return false;
            }
        }
        true
    }

    /// The first n primes, ascending.
    pub fn first_primes(&self, n: usize) -> Vec<u64> {
        if n == 0 {
            return Vec::new();
        }
        let _ = self.nth_prime(n);
        let cache = self.cache.read().unwrap();
        cache.primes[..n].to_vec()
    }

    /// p_n#, the product of the first n primes; `primorial(0) == 1`.
    pub fn primorial(&self, n: usize) -> BigUint {
        if n == 0 {
            return BigUint::one();
        }
        let _ = self.nth_prime(n);
        let cache = self.cache.read().unwrap();
        cache.primes[..n]
            .iter()
            .map(|&p| BigUint::from(p))
            .product()
    }

    fn ensure_covered(&self, limit: u64) {
        let mut cache = self.cache.write().unwrap();
        if cache.covered >= limit {
            return;
        }
        let target = limit.max(cache.covered.saturating_mul(2)).max(1 << 10);
        cache.primes = primes_upto(target);
        cache.covered = target;
    }
}

impl Default for PrimeOracle {
    fn default() -> Self {
        Self::new()
    }
}

/// Rosser-style overestimate of p_n, loose on purpose.
fn nth_prime_upper_bound(n: usize) -> u64 {
    if n < 6 {
        return 16;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln()) * 1.2) as u64 + 16
}

/// Process-wide shared oracle.
pub fn oracle() -> &'static PrimeOracle {
    static ORACLE: OnceLock<PrimeOracle> = OnceLock::new();
    ORACLE.get_or_init(PrimeOracle::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trial division from scratch; referee for the sieve itself.
    fn is_prime_naive(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn small_limits() {
        assert_eq!(primes_upto(13), vec![2, 3, 5, 7, 11, 13]);
        assert_eq!(primes_upto(2), vec![2]);
        assert_eq!(primes_upto(1), Vec::<u64>::new());
        assert_eq!(primes_upto(3), vec![2, 3]);
    }

    #[test]
    fn pi_of_168_is_39() {
        let primes = primes_upto(168);
        assert_eq!(primes.len(), 39);
        assert_eq!(*primes.last().unwrap(), 167);
        let naive: Vec<u64> = (2..=168).filter(|&n| is_prime_naive(n)).collect();
        assert_eq!(primes, naive);
    }

    #[test]
    fn agrees_with_trial_division_up_to_10000() {
        let primes = primes_upto(10_000);
        let naive: Vec<u64> = (2..=10_000).filter(|&n| is_prime_naive(n)).collect();
        assert_eq!(primes, naive);
    }

    #[test]
    fn oracle_nth_prime_and_primorial() {
        let oracle = PrimeOracle::new();
        assert_eq!(oracle.nth_prime(1), 2);
        assert_eq!(oracle.nth_prime(4), 7);
        assert_eq!(oracle.nth_prime(6), 13);
        assert_eq!(oracle.nth_prime(100), 541);
        assert_eq!(oracle.primorial(0), BigUint::from(1u32));
        assert_eq!(oracle.primorial(3), BigUint::from(30u32));
        assert_eq!(oracle.primorial(5), BigUint::from(2310u32));
    }

    #[test]
    fn oracle_is_prime_boundaries() {
        let oracle = PrimeOracle::new();
        assert!(!oracle.is_prime(0));
        assert!(!oracle.is_prime(1));
        assert!(oracle.is_prime(2));
        assert!(!oracle.is_prime(4));
        assert!(oracle.is_prime(167));
        assert!(!oracle.is_prime(168));
        assert!(!oracle.is_prime(143));
        assert!(oracle.is_prime(2_147_483_647));
    }

    #[test]
    fn cache_is_observationally_pure() {
        let a = PrimeOracle::new();
        let b = PrimeOracle::new();
        let _ = a.primes_upto(5000);
        assert_eq!(a.primes_upto(100), b.primes_upto(100));
        assert_eq!(a.nth_prime(25), b.nth_prime(25));
    }
}
