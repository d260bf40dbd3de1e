//! Midpoint-radius ("ball") real arithmetic with certified enclosures.
//!
//! The midpoint is an MPFR float at the working precision; the radius is a
//! short MPFR float that is only ever rounded upward. Monotone functions are
//! evaluated at both endpoints with directed rounding, so every result
//! encloses the exact image of the input enclosure.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Precision of the radius. Radii are upper bounds, so a short mantissa is enough.
const RADIUS_PREC: u32 = 64;

/// A real number known to lie in `[mid - rad, mid + rad]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallReal {
    mid: Float,
    rad: Float,
}

fn rad_zero() -> Float {
    Float::new(RADIUS_PREC)
}

/// Upper bound on the rounding error of a round-to-nearest result.
fn rounding_error(value: &Float, ord: Ordering) -> Float {
    if ord == Ordering::Equal {
        return rad_zero();
    }
    match value.get_exp() {
        // |error| <= ulp/2 = 2^(exp - prec - 1) for a value in [2^(exp-1), 2^exp)
        Some(exp) => Float::with_val(RADIUS_PREC, 1) << (exp - value.prec() as i32),
        // an inexact zero is an underflow; the smallest positive float bounds it
        None => {
            let mut tiny = Float::with_val(RADIUS_PREC, 0);
            tiny.next_up();
            tiny
        }
    }
}

fn up_sum(a: &Float, b: &Float) -> Float {
    Float::with_val_round(RADIUS_PREC, a + b, Round::Up).0
}

fn up_mul(a: &Float, b: &Float) -> Float {
    Float::with_val_round(RADIUS_PREC, a * b, Round::Up).0
}

fn up_abs(a: &Float) -> Float {
    Float::with_val_round(RADIUS_PREC, &*a.as_abs(), Round::Up).0
}

impl BallReal {
    /// Build a ball from a midpoint and a non-negative radius.
    pub fn new(mid: Float, rad: Float) -> Result<Self> {
        if rad.is_nan() || rad.is_sign_negative() && !rad.is_zero() {
            return Err(Error::InvalidArgument(format!("negative radius {rad}")));
        }
        if !mid.is_finite() || !rad.is_finite() {
            return Err(Error::InvalidArgument("non-finite ball".into()));
        }
        let rad = Float::with_val_round(RADIUS_PREC, &*rad.as_abs(), Round::Up).0;
        Ok(BallReal { mid, rad })
    }

    pub fn exact_u64(value: u64, prec: u32) -> Self {
        Self::from_integer(&Integer::from(value), prec)
    }

    pub fn exact_i64(value: i64, prec: u32) -> Self {
        Self::from_integer(&Integer::from(value), prec)
    }

    /// An integer, exact when it fits in `prec` bits.
    pub fn from_integer(value: &Integer, prec: u32) -> Self {
        let (mid, ord) = Float::with_val_round(prec, value, Round::Nearest);
        let rad = rounding_error(&mid, ord);
        BallReal { mid, rad }
    }

    pub fn from_rational(value: &Rational, prec: u32) -> Self {
        let (mid, ord) = Float::with_val_round(prec, value, Round::Nearest);
        let rad = rounding_error(&mid, ord);
        BallReal { mid, rad }
    }

    /// Exact for every finite `f64` when `prec >= 53`.
    pub fn from_f64(value: f64, prec: u32) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite value {value}")));
        }
        let (mid, ord) = Float::with_val_round(prec, value, Round::Nearest);
        let rad = rounding_error(&mid, ord);
        Ok(BallReal { mid, rad })
    }

    /// The smallest ball at precision `prec` containing `[lo, hi]`.
    pub fn from_bounds(lo: &Float, hi: &Float, prec: u32) -> Self {
        debug_assert!(lo <= hi, "from_bounds: {lo} > {hi}");
        let mut mid = Float::with_val_round(prec, lo + hi, Round::Nearest).0;
        mid >>= 1;
        let above = Float::with_val_round(RADIUS_PREC, hi - &mid, Round::Up).0;
        let below = Float::with_val_round(RADIUS_PREC, &mid - lo, Round::Up).0;
        let mut rad = if above > below { above } else { below };
        if rad.is_sign_negative() {
            rad = rad_zero();
        }
        BallReal { mid, rad }
    }

    /// Enclosure of pi, used by closed-form cross-checks.
    pub fn pi(prec: u32) -> Self {
        let lo = Float::with_val_round(prec, Constant::Pi, Round::Down).0;
        let hi = Float::with_val_round(prec, Constant::Pi, Round::Up).0;
        Self::from_bounds(&lo, &hi, prec)
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> &Float {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Lower endpoint, rounded down.
    pub fn lower(&self) -> Float {
        Float::with_val_round(self.prec(), &self.mid - &self.rad, Round::Down).0
    }

    /// Upper endpoint, rounded up.
    pub fn upper(&self) -> Float {
        Float::with_val_round(self.prec(), &self.mid + &self.rad, Round::Up).0
    }

    /// `2 * rad`, rounded up to an `f64`.
    pub fn width(&self) -> f64 {
        let w = Float::with_val_round(RADIUS_PREC, &self.rad * 2u32, Round::Up).0;
        w.to_f64_round(Round::Up)
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    /// Same value re-rounded to a new midpoint precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        let (mid, ord) = Float::with_val_round(prec, &self.mid, Round::Nearest);
        let rad = up_sum(&self.rad, &rounding_error(&mid, ord));
        BallReal { mid, rad }
    }

    /// `(mid - rad, mid + rad)` as exact rationals.
    pub fn exact_endpoints(&self) -> (Rational, Rational) {
        let mid = self.mid.to_rational().expect("finite midpoint");
        let rad = self.rad.to_rational().expect("finite radius");
        (Rational::from(&mid - &rad), mid + rad)
    }

    /// Exact membership test against a rational.
    pub fn contains_rational(&self, q: &Rational) -> bool {
        let mid = self.mid.to_rational().expect("finite midpoint");
        let rad = self.rad.to_rational().expect("finite radius");
        let diff = Rational::from(q - &mid).abs();
        diff <= rad
    }

    /// True when every point of `self` lies inside `other`.
    pub fn is_subset_of(&self, other: &BallReal) -> bool {
        let (lo, hi) = self.exact_endpoints();
        other.contains_rational(&lo) && other.contains_rational(&hi)
    }

    /// True when the two enclosures share at least one point.
    pub fn overlaps(&self, other: &BallReal) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// Certified comparison: `Some(Greater)` if the whole ball exceeds `q`,
    /// `Some(Less)` if it lies entirely below, `Some(Equal)` for an exact ball
    /// equal to `q`, `None` otherwise.
    pub fn cmp_rational(&self, q: &Rational) -> Option<Ordering> {
        let (lo, hi) = self.exact_endpoints();
        if lo > *q {
            Some(Ordering::Greater)
        } else if hi < *q {
            Some(Ordering::Less)
        } else if lo == *q && hi == *q {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn cmp_int(&self, k: i64) -> Option<Ordering> {
        self.cmp_rational(&Rational::from(k))
    }

    pub fn is_positive(&self) -> bool {
        self.lower() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.upper() < 0
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// Image of a non-decreasing function evaluated with directed rounding at both endpoints.
    fn increasing(&self, f: impl Fn(&mut Float, Round) -> Ordering) -> Self {
        let mut lo = self.lower();
        let mut hi = self.upper();
        f(&mut lo, Round::Down);
        f(&mut hi, Round::Up);
        Self::from_bounds(&lo, &hi, self.prec())
    }

    pub fn exp(&self) -> Self {
        self.increasing(|x, r| x.exp_round(r))
    }

    /// Natural logarithm; the enclosure must be strictly positive.
    pub fn ln(&self) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::domain("ln", format!("enclosure {self} is not strictly positive")));
        }
        Ok(self.increasing(|x, r| x.ln_round(r)))
    }

    /// Principal `k`-th root; the enclosure must be strictly positive.
    pub fn root(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("root of degree 0".into()));
        }
        if !self.is_positive() {
            return Err(Error::domain("root", format!("enclosure {self} is not strictly positive")));
        }
        Ok(self.increasing(|x, r| x.root_round(k, r)))
    }

    /// `1 / self`; the enclosure must exclude zero.
    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::domain("recip", format!("enclosure {self} contains zero")));
        }
        // 1/x is decreasing on each half-line
        let mut lo = self.upper();
        let mut hi = self.lower();
        lo.recip_round(Round::Down);
        hi.recip_round(Round::Up);
        Ok(Self::from_bounds(&lo, &hi, self.prec()))
    }

    pub fn div(&self, other: &BallReal) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    /// Integer power. Negative exponents need an enclosure that excludes zero.
    pub fn pow_int(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Ok(Self::exact_u64(1, self.prec()));
        }
        if k < 0 {
            return self.pow_int(-k)?.recip();
        }
        let k = u32::try_from(k).map_err(|_| Error::InvalidArgument(format!("exponent {k} too large")))?;
        let prec = self.prec();
        let pow_dir = |x: &Float, r: Round| Float::with_val_round(prec, x.pow(k), r).0;
        let lo = self.lower();
        let hi = self.upper();
        if k % 2 == 1 || lo >= 0 {
            // monotone increasing on the enclosure
            return Ok(Self::from_bounds(&pow_dir(&lo, Round::Down), &pow_dir(&hi, Round::Up), prec));
        }
        if hi <= 0 {
            // even power of a non-positive enclosure: decreasing
            return Ok(Self::from_bounds(&pow_dir(&hi, Round::Down), &pow_dir(&lo, Round::Up), prec));
        }
        let far = if Float::with_val(prec, -&lo) > hi { Float::with_val(prec, -&lo) } else { hi };
        Ok(Self::from_bounds(&Float::new(prec), &pow_dir(&far, Round::Up), prec))
    }

    /// `self ^ exponent` for a strictly positive base and any real exponent.
    pub fn pow(&self, exponent: &BallReal) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::domain("pow", format!("base {self} is not strictly positive")));
        }
        let prec = self.prec().max(exponent.prec());
        let mut bases = vec![self.lower(), self.upper()];
        let mut exps = vec![exponent.lower(), exponent.upper()];
        bases.dedup();
        exps.dedup();
        // x^y is monotone in each argument separately, so the extremes sit at corners
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for b in &bases {
            for e in &exps {
                let down = Float::with_val_round(prec, b.pow(e), Round::Down).0;
                let up = Float::with_val_round(prec, b.pow(e), Round::Up).0;
                if lo.as_ref().is_none_or(|l| down < *l) {
                    lo = Some(down);
                }
                if hi.as_ref().is_none_or(|h| up > *h) {
                    hi = Some(up);
                }
            }
        }
        Ok(Self::from_bounds(&lo.unwrap(), &hi.unwrap(), prec))
    }

    /// `k^(-s)` for an integer `k >= 1`, using an exact integer power when `s` is an exact integer.
    pub fn inv_pow_u64(k: u64, s: &BallReal, prec: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("inv_pow", "base 0"));
        }
        let base = Float::with_val(64, k);
        if let Some(e) = s.exact_small_int() {
            let lo = Float::with_val_round(prec, (&base).pow(-e), Round::Down).0;
            let hi = Float::with_val_round(prec, (&base).pow(-e), Round::Up).0;
            return Ok(Self::from_bounds(&lo, &hi, prec));
        }
        Self::exact_u64(k, prec.max(64)).pow(&-s).map(|b| b.with_prec(prec))
    }

    pub(crate) fn exact_small_int(&self) -> Option<i32> {
        if !self.is_exact() || !self.mid.is_integer() {
            return None;
        }
        self.mid.to_integer().and_then(|i| i.to_i32())
    }
}

impl fmt::Display for BallReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{} +/- {}]",
            self.mid.to_string_radix(10, Some(24)),
            self.rad.to_string_radix(10, Some(3))
        )
    }
}

impl Add<&BallReal> for &BallReal {
    type Output = BallReal;

    fn add(self, rhs: &BallReal) -> BallReal {
        let prec = self.prec().max(rhs.prec());
        let (mid, ord) = Float::with_val_round(prec, &self.mid + &rhs.mid, Round::Nearest);
        let rad = up_sum(&up_sum(&self.rad, &rhs.rad), &rounding_error(&mid, ord));
        BallReal { mid, rad }
    }
}

impl Sub<&BallReal> for &BallReal {
    type Output = BallReal;

    fn sub(self, rhs: &BallReal) -> BallReal {
        let prec = self.prec().max(rhs.prec());
        let (mid, ord) = Float::with_val_round(prec, &self.mid - &rhs.mid, Round::Nearest);
        let rad = up_sum(&up_sum(&self.rad, &rhs.rad), &rounding_error(&mid, ord));
        BallReal { mid, rad }
    }
}

impl Mul<&BallReal> for &BallReal {
    type Output = BallReal;

    fn mul(self, rhs: &BallReal) -> BallReal {
        let prec = self.prec().max(rhs.prec());
        let (mid, ord) = Float::with_val_round(prec, &self.mid * &rhs.mid, Round::Nearest);
        // |xy - ab| <= |a| r_y + |b| r_x + r_x r_y
        let cross = up_sum(
            &up_mul(&up_abs(&self.mid), &rhs.rad),
            &up_mul(&up_abs(&rhs.mid), &self.rad),
        );
        let rad = up_sum(&up_sum(&cross, &up_mul(&self.rad, &rhs.rad)), &rounding_error(&mid, ord));
        BallReal { mid, rad }
    }
}

impl Neg for &BallReal {
    type Output = BallReal;

    fn neg(self) -> BallReal {
        BallReal { mid: Float::with_val(self.prec(), -&self.mid), rad: self.rad.clone() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for BallReal {
            type Output = BallReal;
            fn $m(self, rhs: BallReal) -> BallReal {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&BallReal> for BallReal {
            type Output = BallReal;
            fn $m(self, rhs: &BallReal) -> BallReal {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for BallReal {
    type Output = BallReal;

    fn neg(self) -> BallReal {
        -&self
    }
}

/// Result of rounding an enclosure to an integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertifiedInt {
    /// Every point of the enclosure rounds to this integer.
    Value(Integer),
    /// The enclosure straddles a rounding boundary; more precision is needed.
    Indeterminate,
}

impl CertifiedInt {
    pub fn value(&self) -> Option<&Integer> {
        match self {
            CertifiedInt::Value(v) => Some(v),
            CertifiedInt::Indeterminate => None,
        }
    }
}

/// Ceiling of an enclosure: `n` when the whole ball lies in `(n - 1, n]`.
pub fn certified_ceiling(x: &BallReal) -> CertifiedInt {
    let (lo, hi) = x.exact_endpoints();
    let n = Integer::from(hi.ceil_ref());
    if lo > Integer::from(&n - 1u32) {
        CertifiedInt::Value(n)
    } else {
        CertifiedInt::Indeterminate
    }
}

/// Floor of an enclosure: `n` when the whole ball lies in `[n, n + 1)`.
pub fn certified_floor(x: &BallReal) -> CertifiedInt {
    match certified_ceiling(&-x) {
        // ceil(-x) = m on (m-1, m]  <=>  x in [-m, -m+1)
        CertifiedInt::Value(m) => CertifiedInt::Value(-m),
        CertifiedInt::Indeterminate => CertifiedInt::Indeterminate,
    }
}

/// Working-precision selection and escalation rules.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionPolicy {
    pub base_bits: u32,
    pub guard_bits: u32,
    pub escalation_factor: f64,
    pub max_escalations: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { base_bits: 128, guard_bits: 64, escalation_factor: 2.0, max_escalations: 8 }
    }
}

impl PrecisionPolicy {
    pub fn new(base_bits: u32, guard_bits: u32, escalation_factor: f64, max_escalations: u32) -> Result<Self> {
        let policy = PrecisionPolicy { base_bits, guard_bits, escalation_factor, max_escalations };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_bits == 0 || self.guard_bits == 0 || self.max_escalations == 0 {
            return Err(Error::InvalidArgument(
                "base_bits, guard_bits and max_escalations must be positive".into(),
            ));
        }
        if !(self.escalation_factor > 1.0) || !self.escalation_factor.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "escalation factor must exceed 1, got {}",
                self.escalation_factor
            )));
        }
        Ok(())
    }

    /// Bits needed to resolve `D_n(s) - 1 ~ p_{n+1}^(-s)` against 1, using
    /// `p_{n+1} < 2 p_n` to bound the unknown prime.
    pub fn bits_for(&self, exponent: f64, p_n: u64) -> u32 {
        let scale = exponent.max(0.0) * ((2 * p_n.max(1)) as f64).log2();
        let needed = scale.ceil() as u64 + 1 + self.guard_bits as u64;
        needed.max(self.base_bits as u64).min(u32::MAX as u64 / 4) as u32
    }

    pub fn escalate(&self, bits: u32) -> u32 {
        let next = (bits as f64 * self.escalation_factor).ceil();
        (next as u64).clamp(bits as u64 + 1, u32::MAX as u64 / 4) as u32
    }

    /// Precisions tried in order: the initial one, then each escalation.
    pub fn schedule(&self, initial: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        let mut bits = initial;
        (0..=self.max_escalations).map(move |attempt| {
            if attempt > 0 {
                bits = self.escalate(bits);
            }
            (attempt, bits)
        })
    }
}

/// Outcome of one attempt at a given working precision.
#[derive(Clone, Debug, PartialEq)]
pub enum Attempt<T> {
    Done(T),
    /// The enclosure was too wide to decide; retry with more bits.
    Undecided,
}

impl PrecisionPolicy {
    /// Runs `attempt(bits, escalations)` along the escalation schedule until it
    /// decides. Domain errors count as "too wide" and also trigger escalation.
    pub fn run_escalating<T>(
        &self,
        initial_bits: u32,
        mut attempt: impl FnMut(u32, u32) -> Result<Attempt<T>>,
    ) -> Result<T> {
        self.validate()?;
        let mut last = Error::PrecisionExhausted { bits: initial_bits, escalations: 0 };
        for (escalations, bits) in self.schedule(initial_bits) {
            match attempt(bits, escalations) {
                Ok(Attempt::Done(value)) => return Ok(value),
                Ok(Attempt::Undecided) => last = Error::Indeterminate { bits, escalations },
                Err(Error::Domain { .. }) => last = Error::PrecisionExhausted { bits, escalations },
                Err(other) => return Err(other),
            }
        }
        Err(last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn ball_around(center: f64, radius: f64, prec: u32) -> BallReal {
        BallReal::new(Float::with_val(prec, center), Float::with_val(64, radius)).unwrap()
    }

    #[test]
    fn mul_of_exact_values_is_exact() {
        let one = BallReal::exact_u64(1, 128);
        let x = BallReal::from_f64(0.731, 128).unwrap();
        let y = &one * &x;
        assert!(y.is_exact());
        assert_eq!(y.mid(), x.mid());
    }

    #[test]
    fn fourth_root_of_sixteen() {
        let r = BallReal::exact_u64(16, 128).root(4).unwrap();
        assert!(r.contains_rational(&Rational::from(2)));
        assert!(r.is_exact());
    }

    #[test]
    fn ln_of_small_ball() {
        let x = ball_around(0.0146780, 1e-10, 256);
        let l = x.ln().unwrap();
        // reference: ln(0.0146780) = -4.22134...
        let reference = Float::with_val(256, 0.0146780f64).ln();
        assert!(l.lower() <= reference && reference <= l.upper());
        assert!(l.width() <= 2e-8);
        assert!((l.mid_f64() + 4.2214).abs() < 1e-3);
    }

    #[test]
    fn ln_and_root_reject_non_positive() {
        let x = ball_around(0.0, 1e-3, 64);
        assert!(matches!(x.ln(), Err(Error::Domain { .. })));
        assert!(matches!(x.root(3), Err(Error::Domain { .. })));
        assert!(matches!(x.recip(), Err(Error::Domain { .. })));
    }

    #[test]
    fn ceiling_examples() {
        let a = BallReal::from_bounds(&Float::with_val(64, 2.87), &Float::with_val(64, 2.88), 64);
        assert_eq!(certified_ceiling(&a), CertifiedInt::Value(Integer::from(3)));
        let b = ball_around(3.0, 1e-9, 64);
        assert_eq!(certified_ceiling(&b), CertifiedInt::Indeterminate);
        let c = BallReal::exact_u64(5, 64);
        assert_eq!(certified_ceiling(&c), CertifiedInt::Value(Integer::from(5)));
        // touching the integer from above is not certified
        let d = BallReal::from_bounds(&Float::with_val(64, 3.0), &Float::with_val(64, 3.5), 64);
        assert_eq!(certified_ceiling(&d), CertifiedInt::Indeterminate);
    }

    #[test]
    fn floor_examples() {
        let a = BallReal::from_bounds(&Float::with_val(64, 4.1), &Float::with_val(64, 4.9), 64);
        assert_eq!(certified_floor(&a), CertifiedInt::Value(Integer::from(4)));
        assert_eq!(certified_floor(&BallReal::exact_i64(-2, 64)), CertifiedInt::Value(Integer::from(-2)));
        let b = ball_around(7.0, 1e-12, 64);
        assert_eq!(certified_floor(&b), CertifiedInt::Indeterminate);
    }

    #[test]
    fn pow_int_even_straddling_zero() {
        let x = ball_around(0.5, 1.0, 64);
        let sq = x.pow_int(2).unwrap();
        assert!(sq.contains_rational(&rat(0, 1)));
        assert!(sq.contains_rational(&rat(9, 4)));
        let neg = x.pow_int(-2);
        assert!(neg.is_err());
    }

    #[test]
    fn inv_pow_integer_and_real_paths_agree() {
        let s_int = BallReal::exact_u64(6, 200);
        let a = BallReal::inv_pow_u64(7, &s_int, 200).unwrap();
        let s_real = BallReal::from_f64(6.0000000001, 200).unwrap();
        let b = BallReal::inv_pow_u64(7, &s_real, 200).unwrap();
        assert!(a.contains_rational(&Rational::from((1, 117_649))));
        assert!(b.upper() < a.lower());
    }

    #[test]
    fn policy_bits_and_schedule() {
        let p = PrecisionPolicy::default();
        // s = 1082, p_n = 541: 1082 * log2(1082) ~ 10906.03
        let bits = p.bits_for(1082.0, 541);
        assert_eq!(bits, 10_907 + 1 + 64);
        let sched: Vec<_> = p.schedule(100).collect();
        assert_eq!(sched.len(), 9);
        assert_eq!(sched[1], (1, 200));
        assert_eq!(sched[8], (8, 25_600));
        assert!(PrecisionPolicy::new(64, 64, 1.0, 8).is_err());
    }

    #[test]
    fn escalation_gives_up_with_a_typed_error() {
        let policy = PrecisionPolicy { max_escalations: 3, ..PrecisionPolicy::default() };
        let mut seen = Vec::new();
        let err = policy
            .run_escalating(100, |bits, _| -> Result<Attempt<()>> {
                seen.push(bits);
                Ok(Attempt::Undecided)
            })
            .unwrap_err();
        assert_eq!(seen, vec![100, 200, 400, 800]);
        assert_eq!(err, Error::Indeterminate { bits: 800, escalations: 3 });

        let err = policy
            .run_escalating(100, |_, _| -> Result<Attempt<()>> { Err(Error::domain("ln", "touches 0")) })
            .unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted { bits: 800, .. }));

        let got = policy
            .run_escalating(100, |bits, esc| Ok(if bits >= 400 { Attempt::Done(esc) } else { Attempt::Undecided }))
            .unwrap();
        assert_eq!(got, 2);
    }

    #[test]
    fn doubling_precision_does_not_widen() {
        let expr = |prec: u32| {
            let x = BallReal::from_rational(&rat(7, 3), prec);
            let y = x.ln().unwrap().exp();
            (&y * &x).root(3).unwrap()
        };
        let mut prev = expr(64);
        for prec in [128, 256, 512, 1024] {
            let next = expr(prec);
            assert!(next.width() <= prev.width());
            assert!(next.overlaps(&prev));
            prev = next;
        }
    }
}
