//! Prime sieve and pairwise-coprime moduli above a threshold.

use num_bigint::BigInt;
use num_traits::One;

/// Sieve bound `max(13, ceil(n (ln n + ln ln n)))`, which dominates the
/// `n`-th prime for every `n >= 1`.
pub fn sieve_bound(count: usize) -> u64 {
    if count < 6 {
        return 13;
    }
    let n = count as f64;
    let k = (n * (n.ln() + n.ln().ln())).ceil() as u64;
    k.max(13)
}

fn primes_up_to(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for p in 2..=limit {
        if composite[p] {
            continue;
        }
        primes.push(p as u64);
        let mut q = p * p;
        while q <= limit {
            composite[q] = true;
            q += p;
        }
    }
    primes
}

/// The first `count` primes, by Eratosthenes' sieve.
pub fn sieve_primes(count: usize) -> Vec<u64> {
    let mut bound = sieve_bound(count);
    loop {
        let mut primes = primes_up_to(bound);
        if primes.len() >= count {
            primes.truncate(count);
            return primes;
        }
        bound *= 2;
    }
}

/// Pairwise-coprime moduli `q_i = p_i^{a_i}`, each the smallest power of the
/// `i`-th prime exceeding the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoprimeSet {
    pub threshold: BigInt,
    pub moduli: Vec<BigInt>,
    pub primes: Vec<u64>,
    pub exponents: Vec<u32>,
}

/// `count` pairwise-coprime integers strictly greater than `threshold`.
///
/// Thresholds below 1 are treated as 1.
pub fn coprime_above(count: usize, threshold: &BigInt) -> CoprimeSet {
    let threshold = threshold.max(&BigInt::one()).clone();
    let primes = sieve_primes(count);
    let mut moduli = Vec::with_capacity(count);
    let mut exponents = Vec::with_capacity(count);
    for &p in &primes {
        let p_big = BigInt::from(p);
        let mut q = p_big.clone();
        let mut e = 1u32;
        while q <= threshold {
            q *= &p_big;
            e += 1;
        }
        moduli.push(q);
        exponents.push(e);
    }
    CoprimeSet {
        threshold,
        moduli,
        primes,
        exponents,
    }
}
