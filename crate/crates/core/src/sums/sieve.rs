//! Segmented sieve of Eratosthenes and the prime-counting functions built on it.

use serde::{Deserialize, Serialize};

use super::SumsError;

const SEGMENT: usize = 1 << 16;

/// All primes up to `limit`, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeTable {
    pub limit: u64,
    pub primes: Vec<u64>,
}

impl PrimeTable {
    /// The primes `≤ x` (clamped to the table).
    pub fn primes_up_to(&self, x: u64) -> &[u64] {
        &self.primes[..self.primes.partition_point(|&p| p <= x)]
    }

    pub fn contains(&self, n: u64) -> bool {
        self.primes.binary_search(&n).is_ok()
    }
}

fn small_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes `≤ xmax`. Memory is bounded by the segment size plus the output.
pub fn sieve(xmax: u64) -> PrimeTable {
    if xmax < 2 {
        return PrimeTable { limit: xmax, primes: Vec::new() };
    }
    let root = xmax.isqrt();
    let base = small_primes(root);
    let mut primes = base.clone();
    let mut lo = root + 1;
    let mut marks = vec![false; SEGMENT];
    while lo <= xmax {
        let hi = (lo + SEGMENT as u64 - 1).min(xmax);
        let len = (hi - lo + 1) as usize;
        marks[..len].fill(false);
        for &p in &base {
            let start = (lo.div_ceil(p) * p).max(p * p);
            let mut m = start;
            while m <= hi {
                marks[(m - lo) as usize] = true;
                m += p;
            }
        }
        primes.extend((0..len).filter(|&i| !marks[i]).map(|i| lo + i as u64));
        lo = hi + 1;
    }
    PrimeTable { limit: xmax, primes }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `π(x)`.
pub fn prime_pi(t: &PrimeTable, x: u64) -> Result<usize, SumsError> {
    if x > t.limit {
        return Err(SumsError::OutOfRange { x, limit: t.limit });
    }
    Ok(t.primes_up_to(x).len())
}

/// `ϑ(x) = Σ_{p ≤ x} log p`.
pub fn chebyshev_theta(t: &PrimeTable, x: u64) -> Result<f64, SumsError> {
    if x > t.limit {
        return Err(SumsError::OutOfRange { x, limit: t.limit });
    }
    let logs: Vec<f64> = t.primes_up_to(x).iter().map(|&p| (p as f64).ln()).collect();
    Ok(super::compensated_sum(&logs))
}
