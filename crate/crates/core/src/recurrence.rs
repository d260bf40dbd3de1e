//! The filtered Dirichlet series `D_n(s)`, the map `h(s) = (D_n(s) - 1)^(-1/s)`
//! and the next-prime recurrence `p_{n+1} = ceil(h(2 p_n))`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle;
use crate::precision::{certified_ceiling, Attempt, BallReal, CertifiedInt, PrecisionPolicy};
use crate::special::{nonnegative_up_to, zeta_real, MAX_TERMS};

pub use crate::special::tail_bound;

/// How a single recurrence step was carried out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepMeta {
    pub exponent: f64,
    pub bits: u32,
    /// Width of the final enclosure of `h(s)`.
    pub width: f64,
    pub escalations: u32,
}

/// `p_1, ..., p_N` together with how each prime after the seed was produced.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimeChain {
    primes: Vec<u64>,
    steps: Vec<StepMeta>,
}

impl PrimeChain {
    /// The chain `[2]`.
    pub fn seed() -> Self {
        PrimeChain { primes: vec![2], steps: Vec::new() }
    }

    /// A chain of known primes, checked against the oracle.
    pub fn from_primes(primes: Vec<u64>) -> Result<Self> {
        let chain = PrimeChain { primes, steps: Vec::new() };
        chain.validate()?;
        Ok(chain)
    }

    /// The first `count` primes from the sieve.
    pub fn from_oracle(count: usize) -> Self {
        PrimeChain { primes: oracle::sieve_primes(count), steps: Vec::new() }
    }

    /// Checks every chain invariant, including primality via the oracle.
    pub fn validate(&self) -> Result<()> {
        if self.primes.first() != Some(&2) {
            return Err(Error::InvalidArgument("a prime chain starts at 2".into()));
        }
        for (i, w) in self.primes.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument(format!("chain not increasing at index {}", i + 1)));
            }
            if w[1] >= 2 * w[0] {
                return Err(Error::InvalidArgument(format!("Bertrand bound violated at index {}", i + 1)));
            }
        }
        if let Some(bad) = self.primes.iter().find(|&&p| !oracle::is_prime(p)) {
            return Err(Error::InvalidArgument(format!("{bad} is not prime")));
        }
        Ok(())
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `steps()[i]` describes how `primes()[i + 1]` was produced.
    pub fn steps(&self) -> &[StepMeta] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// `p_n`, one-based.
    pub fn p(&self, n: usize) -> Option<u64> {
        n.checked_sub(1).and_then(|i| self.primes.get(i).copied())
    }

    fn first(&self, n: usize) -> Result<&[u64]> {
        self.primes.get(..n).ok_or_else(|| {
            Error::InvalidArgument(format!("chain holds {} primes, {n} requested", self.primes.len()))
        })
    }

    fn push(&mut self, prime: u64, meta: StepMeta) -> Result<()> {
        let last = *self.primes.last().expect("chain is never empty");
        if prime <= last {
            return Err(Error::FormulaViolated(format!("produced {prime} after {last}")));
        }
        self.primes.push(prime);
        self.steps.push(meta);
        Ok(())
    }
}

/// Which exponent `s` the recurrence evaluates `h` at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExponentPolicy {
    /// `s = 2 p_n`, always sufficient.
    Proven,
    /// `s = p_n`, conjecturally sufficient.
    Conjectural,
    Fixed(f64),
}

impl ExponentPolicy {
    pub fn exponent(&self, p_n: u64) -> f64 {
        match self {
            ExponentPolicy::Proven => 2.0 * p_n as f64,
            ExponentPolicy::Conjectural => p_n as f64,
            ExponentPolicy::Fixed(s) => *s,
        }
    }
}

impl fmt::Display for ExponentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentPolicy::Proven => f.write_str("proven"),
            ExponentPolicy::Conjectural => f.write_str("conjectural"),
            ExponentPolicy::Fixed(s) => write!(f, "fixed={s}"),
        }
    }
}

impl FromStr for ExponentPolicy {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        match text {
            "proven" => Ok(ExponentPolicy::Proven),
            "conjectural" => Ok(ExponentPolicy::Conjectural),
            other => {
                let value = other
                    .strip_prefix("fixed=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown exponent mode {other:?}")))?;
                if !(value > 1.0) || !value.is_finite() {
                    return Err(Error::InvalidArgument(format!("fixed exponent must exceed 1, got {value}")));
                }
                Ok(ExponentPolicy::Fixed(value))
            }
        }
    }
}

/// `D_n(s) = zeta(s) * prod_{j <= n} (1 - p_j^(-s))` at `bits` of working precision.
pub fn dirichlet_series_product(chain: &PrimeChain, n: usize, s: &BallReal, bits: u32) -> Result<BallReal> {
    let primes = chain.first(n)?;
    let one = BallReal::exact_u64(1, bits);
    let mut value = zeta_real(s, bits)?;
    for &p in primes {
        value = &value * &(&one - &BallReal::inv_pow_u64(p, s, bits)?);
    }
    Ok(value)
}

/// Integers in `2..=cutoff` with no factor among `primes`.
fn coprime_upto(primes: &[u64], cutoff: u64) -> Result<Vec<u64>> {
    if cutoff > MAX_TERMS {
        return Err(Error::Truncation(format!("direct series cutoff {cutoff} exceeds {MAX_TERMS}")));
    }
    let len = cutoff as usize + 1;
    let mut keep = vec![true; len];
    for &p in primes {
        for j in (p as usize..len).step_by(p as usize) {
            keep[j] = false;
        }
    }
    Ok((2..len).filter(|&k| keep[k]).map(|k| k as u64).collect())
}

/// `D_n(s) - 1` summed directly over `1 < k <= cutoff` coprime to `P_n`, plus
/// the certified tail past `cutoff`. No cancellation occurs.
pub fn dirichlet_series_direct_minus_one(
    chain: &PrimeChain,
    n: usize,
    s: &BallReal,
    cutoff: u64,
    bits: u32,
) -> Result<BallReal> {
    let primes = chain.first(n)?;
    if let Some(&p_n) = primes.last() {
        if cutoff < p_n {
            return Err(Error::InvalidArgument(format!("cutoff {cutoff} below p_n = {p_n}")));
        }
    }
    if cutoff < 1 {
        return Err(Error::InvalidArgument("cutoff must be positive".into()));
    }
    let mut sum = BallReal::exact_u64(0, bits);
    for k in coprime_upto(primes, cutoff)? {
        sum = &sum + &BallReal::inv_pow_u64(k, s, bits)?;
    }
    Ok(&sum + &nonnegative_up_to(&tail_bound(cutoff + 1, s)?))
}

/// `D_n(s)` from the defining sum, as an independent check on the product form.
pub fn dirichlet_series_direct(chain: &PrimeChain, n: usize, s: &BallReal, cutoff: u64, bits: u32) -> Result<BallReal> {
    let rest = dirichlet_series_direct_minus_one(chain, n, s, cutoff, bits)?;
    Ok(&BallReal::exact_u64(1, bits) + &rest)
}

/// `x^(-1/s)` computed as `exp(-ln(x) / s)`.
fn neg_root(x: &BallReal, s: &BallReal) -> Result<BallReal> {
    if !x.is_positive() {
        return Err(Error::domain("h", format!("D_n(s) - 1 enclosure {x} is not strictly positive")));
    }
    Ok((-x.ln()?.div(s)?).exp())
}

/// `h(s) = (D_n(s) - 1)^(-1/s)` through the product form.
pub fn h_of_s(chain: &PrimeChain, n: usize, s: &BallReal, bits: u32) -> Result<BallReal> {
    let d = dirichlet_series_product(chain, n, s, bits)?;
    neg_root(&(&d - &BallReal::exact_u64(1, bits)), s)
}

/// `h(s)` through the direct sum.
pub fn h_of_s_direct(chain: &PrimeChain, n: usize, s: &BallReal, cutoff: u64, bits: u32) -> Result<BallReal> {
    neg_root(&dirichlet_series_direct_minus_one(chain, n, s, cutoff, bits)?, s)
}

/// One recurrence step.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub prime: u64,
    pub h: BallReal,
    pub meta: StepMeta,
}

/// `p_{n+1} = ceil(h(s))` with `s` from `exponent`, escalating precision
/// until the ceiling is certified.
pub fn next_prime_effective(
    chain: &PrimeChain,
    n: usize,
    exponent: &ExponentPolicy,
    policy: &PrecisionPolicy,
) -> Result<Step> {
    let p_n = chain
        .p(n)
        .ok_or_else(|| Error::InvalidArgument(format!("need p_{n} but the chain holds {} primes", chain.len())))?;
    let s_value = exponent.exponent(p_n);
    policy.run_escalating(policy.bits_for(s_value, p_n), |bits, escalations| {
        let s = BallReal::from_f64(s_value, bits.max(64))?;
        let h = h_of_s(chain, n, &s, bits)?;
        let CertifiedInt::Value(c) = certified_ceiling(&h) else {
            return Ok(Attempt::Undecided);
        };
        let prime = c
            .to_u64()
            .filter(|&p| p > 0)
            .ok_or_else(|| Error::FormulaViolated(format!("ceiling {c} is not a positive integer")))?;
        let meta = StepMeta { exponent: s_value, bits, width: h.width(), escalations };
        Ok(Attempt::Done(Step { prime, h, meta }))
    })
}

/// Runs the recurrence from `[2]` until the chain holds `count` primes.
pub fn generate_chain(count: usize, exponent: &ExponentPolicy, policy: &PrecisionPolicy) -> Result<PrimeChain> {
    if count == 0 {
        return Err(Error::InvalidArgument("chain length must be at least 1".into()));
    }
    let mut chain = PrimeChain::seed();
    while chain.len() < count {
        let n = chain.len();
        let step = next_prime_effective(&chain, n, exponent, policy).map_err(|e| e.at_step(n + 1))?;
        chain.push(step.prime, step.meta).map_err(|e| e.at_step(n + 1))?;
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;
    use rug::Rational;
    use std::cmp::Ordering;

    fn chain(primes: &[u64]) -> PrimeChain {
        PrimeChain::from_primes(primes.to_vec()).unwrap()
    }

    fn exact(v: u64) -> BallReal {
        BallReal::exact_u64(v, 128)
    }

    #[test]
    fn chain_validation() {
        assert!(PrimeChain::from_primes(vec![2, 3, 5]).is_ok());
        assert!(PrimeChain::from_primes(vec![3, 5]).is_err());
        assert!(PrimeChain::from_primes(vec![2, 3, 3]).is_err());
        assert!(PrimeChain::from_primes(vec![2, 3, 9]).is_err());
        assert!(PrimeChain::from_primes(vec![2, 3, 7]).is_err()); // 7 >= 2*3 fails Bertrand
        assert_eq!(chain(&[2, 3, 5]).p(3), Some(5));
        assert_eq!(chain(&[2]).p(0), None);
    }

    #[test]
    fn exponent_policy_parsing() {
        assert_eq!("proven".parse::<ExponentPolicy>().unwrap(), ExponentPolicy::Proven);
        assert_eq!("conjectural".parse::<ExponentPolicy>().unwrap(), ExponentPolicy::Conjectural);
        assert_eq!("fixed=12.5".parse::<ExponentPolicy>().unwrap(), ExponentPolicy::Fixed(12.5));
        assert!("fixed=0.5".parse::<ExponentPolicy>().is_err());
        assert!("bogus".parse::<ExponentPolicy>().is_err());
        assert_eq!(ExponentPolicy::Proven.exponent(541), 1082.0);
    }

    #[test]
    fn product_form_small_cases() {
        // n = 1, s = 4: zeta(4) * 15/16 = pi^4 / 96
        let d = dirichlet_series_product(&chain(&[2]), 1, &exact(4), 128).unwrap();
        let pi = BallReal::pi(256);
        let expected = &pi.pow_int(4).unwrap() * &BallReal::from_rational(&Rational::from((1, 96)), 256);
        assert!(d.overlaps(&expected));
        assert!((d.mid_f64() - 1.014678032).abs() < 1e-9);

        // n = 0 is zeta itself
        let d0 = dirichlet_series_product(&chain(&[2]), 0, &exact(6), 128).unwrap();
        let z6 = zeta_real(&exact(6), 128).unwrap();
        assert!(d0.overlaps(&z6));

        // n = 2, s = 6: zeta(6) * 63/64 * 728/729, zeta(6) = pi^6/945
        let d2 = dirichlet_series_product(&chain(&[2, 3]), 2, &exact(6), 128).unwrap();
        let z6_closed = &pi.pow_int(6).unwrap() * &BallReal::from_rational(&Rational::from((1, 945)), 256);
        let factor = BallReal::from_rational(&Rational::from((63 * 728, 64 * 729)), 256);
        assert!(d2.overlaps(&(&z6_closed * &factor)));
        assert!((d2.mid_f64() - 1.0000733495).abs() < 1e-9);
    }

    #[test]
    fn direct_form_small_cases() {
        let c = chain(&[2, 3]);
        let prod = dirichlet_series_product(&c, 1, &exact(4), 128).unwrap();
        let direct = dirichlet_series_direct(&c, 1, &exact(4), 100, 128).unwrap();
        assert!(prod.overlaps(&direct));

        let z2 = dirichlet_series_direct(&c, 0, &exact(2), 10_000, 128).unwrap();
        assert!(z2.lower() <= 1.6449340668482264 && z2.upper() >= 1.6449340668482264);

        // n = 2, s = 6, cutoff 49: the partial sum is the lower end
        let d = dirichlet_series_direct_minus_one(&c, 2, &exact(6), 49, 128).unwrap();
        let mut partial = Rational::new();
        for k in (5..=49u32).filter(|k| k % 2 != 0 && k % 3 != 0) {
            partial += Rational::from((1, rug::Integer::from(k).pow(6)));
        }
        assert!(d.contains_rational(&partial));
        let (lo, _) = d.exact_endpoints();
        assert!(lo <= partial && lo >= (&partial * Rational::from((999_999_999_999_999u64, 1_000_000_000_000_000u64))));
        assert!(dirichlet_series_direct(&c, 2, &exact(6), 2, 64).is_err());
    }

    #[test]
    fn h_small_cases() {
        let c = chain(&[2, 3]);
        let h4 = h_of_s(&c, 1, &exact(4), 128).unwrap();
        assert!((h4.mid_f64() - 2.8729).abs() < 1e-3);
        assert_eq!(certified_ceiling(&h4), CertifiedInt::Value(3.into()));
        let h2 = h_of_s(&c, 1, &exact(2), 128).unwrap();
        assert!((h2.mid_f64() - 2.0687).abs() < 1e-3);
        let hd = h_of_s_direct(&c, 1, &exact(4), 10_000, 128).unwrap();
        assert!(hd.overlaps(&h4));
    }

    #[test]
    fn h_stays_below_next_prime() {
        let c = PrimeChain::from_oracle(12);
        for n in 1..=10 {
            let next = c.p(n + 1).unwrap() as i64;
            for s in [1.5f64, 2.0, 3.7, 8.0, 2.0 * c.p(n).unwrap() as f64] {
                let sb = BallReal::from_f64(s, 128).unwrap();
                let bits = PrecisionPolicy::default().bits_for(s, c.p(n).unwrap());
                let h = h_of_s_direct(&c, n, &sb, c.p(n).unwrap().pow(2).max(5000), bits).unwrap();
                assert_eq!(h.cmp_int(next), Some(Ordering::Less), "n={n} s={s}");
            }
        }
    }

    #[test]
    fn next_prime_examples() {
        let policy = PrecisionPolicy::default();
        let step = next_prime_effective(&chain(&[2]), 1, &ExponentPolicy::Proven, &policy).unwrap();
        assert_eq!(step.prime, 3);
        assert_eq!(step.meta.exponent, 4.0);
        let step = next_prime_effective(&chain(&[2, 3]), 2, &ExponentPolicy::Proven, &policy).unwrap();
        assert_eq!(step.prime, 5);
        let c = PrimeChain::from_oracle(25);
        let step = next_prime_effective(&c, 25, &ExponentPolicy::Proven, &policy).unwrap();
        assert_eq!(step.prime, 101);
        assert!(next_prime_effective(&c, 26, &ExponentPolicy::Proven, &policy).is_err());
    }

    #[test]
    fn short_chains() {
        let policy = PrecisionPolicy::default();
        assert_eq!(generate_chain(1, &ExponentPolicy::Proven, &policy).unwrap().primes(), &[2]);
        let c = generate_chain(5, &ExponentPolicy::Proven, &policy).unwrap();
        assert_eq!(c.primes(), &[2, 3, 5, 7, 11]);
        assert_eq!(c.steps().len(), 4);
        assert!(c.validate().is_ok());
        assert!(generate_chain(0, &ExponentPolicy::Proven, &policy).is_err());
        let c = generate_chain(12, &ExponentPolicy::Conjectural, &policy).unwrap();
        assert_eq!(c.primes(), oracle::sieve_primes(12).as_slice());
    }
}
