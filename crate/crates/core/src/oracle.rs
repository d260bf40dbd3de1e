//! Ground-truth primes from a plain sieve and trial division.
//!
//! Nothing here touches the analytic machinery, so it can judge it.

/// Primality bitmap for `0..=limit`.
#[derive(Clone, Debug)]
pub struct SieveTable {
    limit: u64,
    is_prime: Vec<bool>,
}

impl SieveTable {
    pub fn new(limit: u64) -> Self {
        let len = limit as usize + 1;
        let mut is_prime = vec![true; len];
        is_prime[0] = false;
        if len > 1 {
            is_prime[1] = false;
        }
        let mut i = 2usize;
        while i * i < len {
            if is_prime[i] {
                for j in (i * i..len).step_by(i) {
                    is_prime[j] = false;
                }
            }
            i += 1;
        }
        SieveTable { limit, is_prime }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `None` when `k` is beyond the table.
    pub fn is_prime(&self, k: u64) -> Option<bool> {
        self.is_prime.get(usize::try_from(k).ok()?).copied()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.is_prime.iter().enumerate().filter(|(_, &p)| p).map(|(k, _)| k as u64)
    }
}

/// Upper bound on the `count`-th prime (Rosser's bound for `count >= 6`).
fn nth_prime_upper_bound(count: usize) -> u64 {
    if count < 6 {
        return 15;
    }
    let n = count as f64;
    (n * (n.ln() + n.ln().ln())).ceil() as u64
}

/// The first `count` primes.
pub fn sieve_primes(count: usize) -> Vec<u64> {
    let table = SieveTable::new(nth_prime_upper_bound(count));
    table.primes().take(count).collect()
}

/// Deterministic trial division.
pub fn is_prime(k: u64) -> bool {
    if k < 2 {
        return false;
    }
    if k < 4 {
        return true;
    }
    if k.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d <= k / d {
        if k.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime strictly greater than `k`.
pub fn next_prime(k: u64) -> u64 {
    let mut c = k + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_primes() {
        assert_eq!(sieve_primes(5), vec![2, 3, 5, 7, 11]);
        assert_eq!(*sieve_primes(25).last().unwrap(), 97);
        assert_eq!(*sieve_primes(120).last().unwrap(), 659);
        assert_eq!(sieve_primes(1), vec![2]);
    }

    #[test]
    fn trial_division_examples() {
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(2));
        assert!(is_prime(659));
        assert!(!is_prime(661 * 659));
        assert!(is_prime(2_147_483_647));
    }

    #[test]
    fn sieve_agrees_with_trial_division() {
        let table = SieveTable::new(10_000);
        for k in 0..=10_000 {
            assert_eq!(table.is_prime(k), Some(is_prime(k)), "k = {k}");
        }
        assert_eq!(table.is_prime(10_001), None);
    }

    #[test]
    fn rosser_bound_holds() {
        let primes = sieve_primes(2000);
        for (i, p) in primes.iter().enumerate() {
            assert!(*p <= nth_prime_upper_bound(i + 1));
        }
        assert_eq!(next_prime(97), 101);
        assert_eq!(next_prime(2), 3);
    }
}
