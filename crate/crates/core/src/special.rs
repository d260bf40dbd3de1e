//! Certified evaluation of `zeta(s)` and `L(s, chi_4)` for real `s > 1`.

use std::sync::Mutex;

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::precision::BallReal;

/// Largest truncation point either series will sum up to.
pub const MAX_TERMS: u64 = 1 << 26;

/// The non-principal Dirichlet character modulo 4.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CharacterMod4;

impl CharacterMod4 {
    pub fn value(self, k: u64) -> i8 {
        match k % 4 {
            1 => 1,
            3 => -1,
            _ => 0,
        }
    }
}

fn require_above_one(op: &'static str, s: &BallReal) -> Result<()> {
    if s.lower() > 1 {
        Ok(())
    } else {
        Err(Error::domain(op, format!("exponent enclosure {s} is not strictly above 1")))
    }
}

/// Upper bound on `sum_{k >= from} k^(-s)` via the integral comparison
/// `(from - 1)^(1 - s) / (s - 1)`.
pub fn tail_bound(from: u64, s: &BallReal) -> Result<BallReal> {
    if from < 2 {
        return Err(Error::InvalidArgument(format!("tail must start at m >= 2, got {from}")));
    }
    require_above_one("tail_bound", s)?;
    let prec = s.prec();
    let one = BallReal::exact_u64(1, prec);
    let base = BallReal::exact_u64(from - 1, prec.max(64));
    base.pow(&(&one - s))?.div(&(s - &one))
}

/// `[0, bound]` as a ball, where `bound` is the certified upper end of `tail`.
pub(crate) fn nonnegative_up_to(tail: &BallReal) -> BallReal {
    let hi = tail.upper();
    BallReal::from_bounds(&Float::new(tail.prec()), &hi, tail.prec())
}

/// True when the certified upper end of `x` is below `2^(-bits)`.
fn below_pow2(x: &BallReal, bits: u32) -> bool {
    let target = Float::with_val(64, 1) >> bits;
    x.upper() < target
}

/// Smallest `K` whose tail `sum_{k > K} k^(-s)` is certified below `2^(-bits)`.
pub fn zeta_truncation(s: &BallReal, bits: u32) -> Result<u64> {
    require_above_one("zeta", s)?;
    let s_lo = s.lower().to_f64_round(rug::float::Round::Down);
    // K^(1-s)/(s-1) < 2^-bits  <=>  log2 K > (bits - log2(s-1)) / (s-1)
    let log2_k = (bits as f64 - (s_lo - 1.0).log2()) / (s_lo - 1.0);
    if !log2_k.is_finite() || log2_k > (MAX_TERMS as f64).log2() {
        return Err(Error::Truncation(format!(
            "zeta at s = {s} needs more than {MAX_TERMS} terms for 2^-{bits}"
        )));
    }
    let mut k = (log2_k.exp2().floor() as u64).max(1);
    while k > 1 && below_pow2(&tail_bound(k, s)?, bits) {
        k -= 1;
    }
    while !below_pow2(&tail_bound(k + 1, s)?, bits) {
        k += 1;
        if k > MAX_TERMS {
            return Err(Error::Truncation(format!("zeta truncation exceeded {MAX_TERMS}")));
        }
    }
    Ok(k)
}

/// Certified enclosure of `zeta(s)` with absolute error below about `2^(-bits)`.
///
/// Sums the Dirichlet series directly when that needs few terms, otherwise
/// uses Euler-Maclaurin summation with an explicit remainder bound.
pub fn zeta_real(s: &BallReal, bits: u32) -> Result<BallReal> {
    require_above_one("zeta", s)?;
    let s_lo = s.lower().to_f64_round(rug::float::Round::Down);
    let direct_log2 = (bits as f64 - (s_lo - 1.0).log2()) / (s_lo - 1.0);
    if direct_log2 <= DIRECT_LOG2_LIMIT {
        return zeta_direct(s, bits);
    }
    zeta_euler_maclaurin(s, bits)
}

/// Above `2^DIRECT_LOG2_LIMIT` terms the direct sum loses to Euler-Maclaurin.
const DIRECT_LOG2_LIMIT: f64 = 12.0;

fn zeta_direct(s: &BallReal, bits: u32) -> Result<BallReal> {
    let cutoff = zeta_truncation(s, bits)?;
    let mut sum = BallReal::exact_u64(1, bits);
    for k in 2..=cutoff {
        sum = &sum + &BallReal::inv_pow_u64(k, s, bits)?;
    }
    Ok(&sum + &nonnegative_up_to(&tail_bound(cutoff + 1, s)?))
}

/// Estimated `log2` of the remainder bound
/// `4 |(s)_{2M}| / (2 pi)^{2M} * X^{1-s-2M} / (s+2M-1)` with `X = N + a`.
fn em_remainder_log2(s: f64, x: f64, m: u64) -> f64 {
    let poch: f64 = (0..2 * m).map(|i| (s + i as f64).log2()).sum();
    let two_m = 2.0 * m as f64;
    2.0 + poch - two_m * std::f64::consts::TAU.log2() - (s + two_m - 1.0) * x.log2() - (s + two_m - 1.0).log2()
}

/// Smallest power-of-two `N` (and a matching `M`) whose remainder estimate clears `2^(-bits)`.
fn em_parameters(s: f64, a: f64, bits: u32) -> Result<(u64, u64)> {
    let target = -(bits as f64) - 4.0;
    let mut n = 8u64;
    while n <= MAX_TERMS {
        let mut best = f64::INFINITY;
        for m in 1..=4 * n {
            let e = em_remainder_log2(s, n as f64 + a, m);
            if e < target {
                return Ok((n, m));
            }
            if e > best {
                break;
            }
            best = e;
        }
        n *= 2;
    }
    Err(Error::Truncation(format!("Euler-Maclaurin at s = {s} for 2^-{bits} needs N > {MAX_TERMS}")))
}

/// `B_2, B_4, ..., B_{2m}` as exact rationals, cached across calls.
fn bernoulli_even(m: usize) -> Vec<Rational> {
    static CACHE: Mutex<Vec<Rational>> = Mutex::new(Vec::new());
    let mut all = CACHE.lock().unwrap_or_else(|e| e.into_inner());
    if all.is_empty() {
        all.extend([Rational::from(1), Rational::from((-1, 2))]);
    }
    // sum_{j=0}^{n} C(n+1, j) B_j = 0, with B_j = 0 for odd j >= 3
    while all.len() <= 2 * m {
        let n = all.len() as u32;
        if n % 2 == 1 {
            all.push(Rational::new());
            continue;
        }
        let mut acc = Rational::new();
        for (j, b) in all.iter().enumerate() {
            if *b != 0 {
                acc += Rational::from(Integer::from(Integer::binomial_u(n + 1, j as u32)) * b);
            }
        }
        all.push(-acc / (n + 1));
    }
    (1..=m).map(|k| all[2 * k].clone()).collect()
}

/// `q^(-s)` for a positive rational `q`.
fn rational_inv_pow(q: &Rational, s: &BallReal, prec: u32) -> Result<BallReal> {
    let base = BallReal::from_rational(q, prec);
    match s.exact_small_int() {
        Some(e) => base.pow_int(-(e as i64)),
        None => base.pow(&-s),
    }
}

fn zeta_euler_maclaurin(s: &BallReal, bits: u32) -> Result<BallReal> {
    hurwitz_zeta(s, &Rational::from(1), bits)
}

/// Hurwitz `zeta(s, a) = sum_{k >= 0} (k + a)^(-s)` for rational `0 < a <= 1`,
/// with absolute error below about `2^(-bits)`.
pub fn hurwitz_zeta(s: &BallReal, a: &Rational, bits: u32) -> Result<BallReal> {
    require_above_one("hurwitz_zeta", s)?;
    if *a <= 0 || *a > 1 {
        return Err(Error::InvalidArgument(format!("Hurwitz parameter must lie in (0, 1], got {a}")));
    }
    let s_lo = s.lower().to_f64_round(rug::float::Round::Down);
    let (n, m) = em_parameters(s_lo, a.to_f64(), bits)?;
    let wp = bits + 32;
    let s = &s.with_prec(wp.max(s.prec()));
    let one = BallReal::exact_u64(1, wp);
    let x_rat = Rational::from(a + n);
    let x = BallReal::from_rational(&x_rat, wp);
    let x_neg_s = rational_inv_pow(&x_rat, s, wp)?;

    let mut sum = BallReal::exact_u64(0, wp);
    for k in 0..n {
        sum = &sum + &rational_inv_pow(&Rational::from(a + k), s, wp)?;
    }
    sum = &sum + &(&x_neg_s * &x).div(&(s - &one))?;
    sum = &sum + &(&x_neg_s * &BallReal::from_rational(&Rational::from((1, 2)), wp));

    let bern = bernoulli_even(m as usize);
    let x_sq = &x * &x;
    // (s)_{2k-1} and X^(1-s-2k), updated in step
    let mut poch = s.clone();
    let mut power = x_neg_s.div(&x)?;
    let mut factorial = Integer::from(2);
    for k in 1..=m {
        let coeff = BallReal::from_rational(&Rational::from(&bern[k as usize - 1] / &factorial), wp);
        sum = &sum + &(&(&coeff * &poch) * &power);
        let next = BallReal::exact_u64(2 * k, wp);
        poch = &(&poch * &(s + &(&next - &one))) * &(s + &next);
        power = power.div(&x_sq)?;
        factorial *= (2 * k + 1) * (2 * k + 2);
    }

    // (s)_{2M} from (s)_{2M+1} = (s)_{2M} (s + 2M), and X^(1-s-2M) = power * X^2
    let two_m = BallReal::exact_u64(2 * m, wp);
    let poch_2m = poch.div(&(s + &two_m))?;
    let two_pi_2m = (&BallReal::pi(wp) * &BallReal::exact_u64(2, wp)).pow_int(2 * m as i64)?;
    let remainder = &(&BallReal::exact_u64(4, wp) * &poch_2m).div(&two_pi_2m)?
        * &(&power * &x_sq).div(&(s + &(&two_m - &one)))?;
    let r = remainder.upper();
    let err = BallReal::from_bounds(&Float::with_val(64, -&r), &r, wp);
    Ok((&sum + &err).with_prec(bits.max(s.prec())))
}

/// Certified enclosure of `L(s, chi_4) = 1 - 3^-s + 5^-s - ...`.
///
/// The alternating remainder has the sign of the first omitted term and is
/// bounded by its magnitude.
pub fn l_chi4(s: &BallReal, bits: u32) -> Result<BallReal> {
    require_above_one("l_chi4", s)?;
    let s_lo = s.lower().to_f64_round(rug::float::Round::Down);
    if bits as f64 / s_lo > DIRECT_LOG2_LIMIT {
        // L(s, chi_4) = 4^-s (zeta(s, 1/4) - zeta(s, 3/4)); both terms are at most ~4^s
        let h_bits = bits + (2.0 * s.upper().to_f64()).ceil() as u32 + 8;
        let quarter = hurwitz_zeta(s, &Rational::from((1, 4)), h_bits)?;
        let three = hurwitz_zeta(s, &Rational::from((3, 4)), h_bits)?;
        let scale = BallReal::inv_pow_u64(4, s, h_bits)?;
        return Ok((&scale * &(&quarter - &three)).with_prec(bits.max(s.prec())));
    }
    let chi = CharacterMod4;
    let mut sum = BallReal::exact_u64(1, bits);
    let mut k = 3u64;
    loop {
        let term = BallReal::inv_pow_u64(k, s, bits)?;
        if below_pow2(&term, bits) {
            // first omitted term: remainder lies between 0 and chi(k) * k^-s
            let bound = nonnegative_up_to(&term);
            return Ok(if chi.value(k) > 0 { &sum + &bound } else { &sum - &bound });
        }
        sum = if chi.value(k) > 0 { &sum + &term } else { &sum - &term };
        k += 2;
        if k > MAX_TERMS {
            return Err(Error::Truncation(format!("L(s, chi_4) at s = {s} needs more than {MAX_TERMS} terms")));
        }
    }
}
