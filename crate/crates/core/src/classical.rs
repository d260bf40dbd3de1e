//! Arithmetic-side recurrences: Gandhi's inequality and the Golomb-Trefeu
//! base-`b` logarithm formula. Both read `p_{n+1}` off the Möbius sum
//! `sum_{d | P_n} mu(d) / (b^d - 1)`, which is the generating function of the
//! integers coprime to `P_n` evaluated at `1/b`.

use std::cmp::Ordering;

use rug::float::Round;
use rug::{Float, Integer, Rational};
use rug::ops::Pow;

use crate::error::{Error, Result};
use crate::precision::{certified_floor, Attempt, BallReal, CertifiedInt, PrecisionPolicy};
use crate::recurrence::PrimeChain;

/// Squarefree divisors `d <= d_max` of `p_1 * ... * p_n` with their Möbius signs.
#[derive(Clone, Debug)]
pub struct SquarefreeDivisorStream {
    primes: Vec<u64>,
    d_max: u64,
    // (next prime index, divisor so far, mu of that divisor)
    stack: Vec<(usize, u64, i8)>,
}

impl SquarefreeDivisorStream {
    pub fn new(primes: &[u64], d_max: u64) -> Self {
        let mut primes = primes.to_vec();
        primes.sort_unstable();
        let stack = if d_max >= 1 { vec![(0, 1, 1)] } else { Vec::new() };
        SquarefreeDivisorStream { primes, d_max, stack }
    }
}

impl Iterator for SquarefreeDivisorStream {
    type Item = (u64, i8);

    fn next(&mut self) -> Option<(u64, i8)> {
        let (start, d, mu) = self.stack.pop()?;
        for j in start..self.primes.len() {
            match d.checked_mul(self.primes[j]) {
                Some(next) if next <= self.d_max => self.stack.push((j + 1, next, -mu)),
                _ => break,
            }
        }
        Some((d, mu))
    }
}

fn primorial(primes: &[u64]) -> Integer {
    primes.iter().fold(Integer::from(1), |acc, &p| acc * p)
}

/// Smallest `d_max` with `2^n / (b^d_max - 1) < 2^(-target_bits)`.
pub fn default_d_max(n: usize, base: u64, target_bits: u32) -> u64 {
    let limit = Integer::from(1) << (n as u32 + target_bits);
    let mut d = ((n as f64 + target_bits as f64) / (base as f64).log2()).floor().max(1.0) as u64;
    while d > 1 && Integer::from(base).pow(d as u32 - 1) - 1u32 > limit {
        d -= 1;
    }
    while Integer::from(base).pow(d as u32) - 1u32 <= limit {
        d += 1;
    }
    d
}

/// Enclosure of `sum_{d | P_n} mu(d) / (b^d - 1)` keeping divisors up to
/// `d_max`. The dropped divisors contribute at most `2^n / (b^d_max - 1)`,
/// which must be below `2^(-target_bits)` unless nothing was dropped.
pub fn mobius_sum(chain: &PrimeChain, n: usize, base: u64, d_max: u64, target_bits: u32) -> Result<BallReal> {
    if base < 2 {
        return Err(Error::InvalidArgument(format!("base must be at least 2, got {base}")));
    }
    if d_max < 1 {
        return Err(Error::InvalidArgument("d_max must be positive".into()));
    }
    let primes = chain
        .primes()
        .get(..n)
        .ok_or_else(|| Error::InvalidArgument(format!("chain holds {} primes, {n} requested", chain.len())))?;
    let truncated = primorial(primes) > d_max;
    let dropped_bound = if truncated {
        let denom = Integer::from(base).pow(u32::try_from(d_max).map_err(|_| {
            Error::InvalidArgument(format!("d_max {d_max} too large"))
        })?) - 1u32;
        if denom <= Integer::from(1) << (n as u32 + target_bits) {
            return Err(Error::Truncation(format!(
                "d_max = {d_max} cannot certify 2^-{target_bits} for n = {n}, base {base}"
            )));
        }
        Some(Rational::from((Integer::from(1) << n as u32, denom)))
    } else {
        None
    };

    let prec = target_bits + 64;
    let mut sum = BallReal::exact_u64(0, prec);
    for (d, mu) in SquarefreeDivisorStream::new(primes, d_max) {
        let denom = Integer::from(base).pow(d as u32) - 1u32;
        let term = BallReal::from_integer(&denom, prec + d as u32 * 4).recip()?.with_prec(prec);
        sum = if mu > 0 { &sum + &term } else { &sum - &term };
    }
    if let Some(bound) = dropped_bound {
        let hi = Float::with_val_round(64, &bound, Round::Up).0;
        let lo = Float::with_val(64, -&hi);
        sum = &sum + &BallReal::from_bounds(&lo, &hi, prec);
    }
    Ok(sum)
}

/// Outcome of a classical next-prime evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalStep {
    pub prime: u64,
    /// The argument whose negated base-`b` logarithm is floored.
    pub argument: BallReal,
    /// `2^p (sum - 1/2)` for Gandhi's formula, which must lie in `(1, 2)`.
    pub window: Option<BallReal>,
    pub bits: u32,
    pub escalations: u32,
}

/// Absolute precision needed to resolve `b^(-p_{n+1}) > b^(-2 p_n)`.
fn classical_bits(p_n: u64, base: u64, policy: &PrecisionPolicy) -> u32 {
    let scale = (2 * p_n) as f64 * (base as f64).log2();
    (scale.ceil() as u32 + policy.guard_bits).max(policy.base_bits)
}

/// `floor(-log_b(arg)) + 1`, or `None` when the floor straddles an integer.
fn neg_log_floor_plus_one(arg: &BallReal, base: u64, bits: u32) -> Result<Option<u64>> {
    match arg.cmp_int(0) {
        Some(Ordering::Greater) => {}
        Some(_) => {
            return Err(Error::FormulaViolated(format!("logarithm argument {arg} is not positive")));
        }
        None => return Ok(None),
    }
    let log_b = BallReal::exact_u64(base, bits.max(64)).ln()?;
    let y = -arg.ln()?.div(&log_b)?;
    Ok(match certified_floor(&y) {
        CertifiedInt::Value(f) => Some(
            (f + 1u32)
                .to_u64()
                .ok_or_else(|| Error::FormulaViolated("floor out of range".into()))?,
        ),
        CertifiedInt::Indeterminate => None,
    })
}

fn require_n(chain: &PrimeChain, n: usize) -> Result<u64> {
    chain
        .p(n)
        .ok_or_else(|| Error::InvalidArgument(format!("need p_{n} (n >= 1) in a chain of {}", chain.len())))
}

/// The unique `p` with `1 < 2^p (-1/2 + sum_{d | P_n} mu(d) / (2^d - 1)) < 2`.
pub fn gandhi_next_prime(chain: &PrimeChain, n: usize, policy: &PrecisionPolicy) -> Result<ClassicalStep> {
    let p_n = require_n(chain, n)?;
    policy.run_escalating(classical_bits(p_n, 2, policy), |bits, escalations| {
        let sum = mobius_sum(chain, n, 2, default_d_max(n, 2, bits), bits)?;
        let half = BallReal::from_rational(&Rational::from((1, 2)), bits);
        let argument = &sum - &half;
        let Some(prime) = neg_log_floor_plus_one(&argument, 2, bits)? else {
            return Ok(Attempt::Undecided);
        };
        let window = gandhi_window(&argument, prime)?;
        match (window.cmp_int(1), window.cmp_int(2)) {
            (Some(Ordering::Greater), Some(Ordering::Less)) => {
                Ok(Attempt::Done(ClassicalStep { prime, argument, window: Some(window), bits, escalations }))
            }
            (Some(Ordering::Less | Ordering::Equal), _) | (_, Some(Ordering::Greater | Ordering::Equal)) => Err(
                Error::FormulaViolated(format!("Gandhi window {window} for p = {prime} is outside (1, 2)")),
            ),
            _ => Ok(Attempt::Undecided),
        }
    })
}

/// `2^p * argument`.
pub fn gandhi_window(argument: &BallReal, p: u64) -> Result<BallReal> {
    let exp = u32::try_from(p).map_err(|_| Error::InvalidArgument(format!("exponent {p} too large")))?;
    let scale = BallReal::from_integer(&(Integer::from(1) << exp), argument.prec().max(exp + 2));
    Ok(argument * &scale)
}

/// `floor(-log_b((b - 1) * sum - (b - 1) / b)) + 1`.
pub fn golomb_trefeu_next_prime(
    chain: &PrimeChain,
    n: usize,
    base: u64,
    policy: &PrecisionPolicy,
) -> Result<ClassicalStep> {
    if base < 2 {
        return Err(Error::InvalidArgument(format!("base must be at least 2, got {base}")));
    }
    let p_n = require_n(chain, n)?;
    policy.run_escalating(classical_bits(p_n, base, policy), |bits, escalations| {
        let sum = mobius_sum(chain, n, base, default_d_max(n, base, bits), bits)?;
        let scale = BallReal::exact_u64(base - 1, bits);
        let first = BallReal::from_rational(&Rational::from((base - 1, base)), bits);
        let argument = &(&scale * &sum) - &first;
        Ok(match neg_log_floor_plus_one(&argument, base, bits)? {
            Some(prime) => Attempt::Done(ClassicalStep { prime, argument, window: None, bits, escalations }),
            None => Attempt::Undecided,
        })
    })
}
