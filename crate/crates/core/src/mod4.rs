//! Predicting `p_{n+1} mod 4` from the sign of `V_n(s) - 1`, where
//! `V_n(s) = L(s, chi_4) * prod_{k <= n} (1 - chi_4(p_k) p_k^(-s))`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::oracle;
use crate::precision::{Attempt, BallReal, PrecisionPolicy};
use crate::recurrence::{ExponentPolicy, PrimeChain};
use crate::special::{l_chi4, CharacterMod4};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Residue {
    One,
    Three,
    Indeterminate,
}

impl Residue {
    pub fn as_u64(self) -> Option<u64> {
        match self {
            Residue::One => Some(1),
            Residue::Three => Some(3),
            Residue::Indeterminate => None,
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residue::One => f.write_str("1"),
            Residue::Three => f.write_str("3"),
            Residue::Indeterminate => f.write_str("indeterminate"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mod4Prediction {
    pub n: usize,
    pub p_n: u64,
    pub p_next: u64,
    pub v_enclosure: BallReal,
    pub predicted: Residue,
    /// `p_{n+1} mod 4` from the oracle.
    pub actual: u64,
}

impl Mod4Prediction {
    pub fn matches(&self) -> bool {
        self.predicted.as_u64() == Some(self.actual)
    }
}

/// Enclosure of `V_n(s)`. The factor for `p = 2` is exactly 1 and is skipped.
pub fn v_function(chain: &PrimeChain, n: usize, s: &BallReal, bits: u32) -> Result<BallReal> {
    let primes = chain
        .primes()
        .get(..n)
        .ok_or_else(|| Error::InvalidArgument(format!("chain holds {} primes, {n} requested", chain.len())))?;
    let chi = CharacterMod4;
    let one = BallReal::exact_u64(1, bits);
    let mut value = l_chi4(s, bits)?;
    for &p in primes {
        let factor = match chi.value(p) {
            0 => continue,
            1 => &one - &BallReal::inv_pow_u64(p, s, bits)?,
            _ => &one + &BallReal::inv_pow_u64(p, s, bits)?,
        };
        value = &value * &factor;
    }
    Ok(value)
}

/// Classifies an enclosure of `V_n(s)` against 1.
pub fn classify(v: &BallReal) -> Residue {
    match v.cmp_int(1) {
        Some(Ordering::Greater) => Residue::One,
        Some(Ordering::Less) => Residue::Three,
        _ => Residue::Indeterminate,
    }
}

/// Predicts `p_{n+1} mod 4` at the exponent chosen by `exponent` (the
/// criterion is stated for `s = 2 p_n`), escalating while the enclosure
/// contains 1.
pub fn predict_mod4(
    chain: &PrimeChain,
    n: usize,
    exponent: &ExponentPolicy,
    policy: &PrecisionPolicy,
) -> Result<Mod4Prediction> {
    let p_n = chain
        .p(n)
        .ok_or_else(|| Error::InvalidArgument(format!("need p_{n} (n >= 1) in a chain of {}", chain.len())))?;
    let s_value = exponent.exponent(p_n);
    let p_next = oracle::next_prime(p_n);
    let evaluate = |bits: u32| -> Result<BallReal> {
        let s = BallReal::from_f64(s_value, bits.max(64))?;
        v_function(chain, n, &s, bits)
    };
    let initial = policy.bits_for(s_value, p_n);
    let mut last = None;
    let decided = policy.run_escalating(initial, |bits, _| {
        let v = evaluate(bits)?;
        let residue = classify(&v);
        last = Some(v.clone());
        Ok(match residue {
            Residue::Indeterminate => Attempt::Undecided,
            r => Attempt::Done((v, r)),
        })
    });
    let (v_enclosure, predicted) = match decided {
        Ok(done) => done,
        Err(Error::Indeterminate { .. }) => (last.expect("at least one attempt"), Residue::Indeterminate),
        Err(other) => return Err(other),
    };
    Ok(Mod4Prediction { n, p_n, p_next, v_enclosure, predicted, actual: p_next % 4 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(v: u64) -> BallReal {
        BallReal::exact_u64(v, 128)
    }

    #[test]
    fn v_small_cases() {
        let c = PrimeChain::from_oracle(3);
        let v = v_function(&c, 2, &exact(6), 128).unwrap();
        assert!((v.mid_f64() - 1.0000551608).abs() < 1e-9, "{v}");
        let l = l_chi4(&exact(6), 128).unwrap();
        let expected = &l * &BallReal::from_rational(&rug::Rational::from((730, 729)), 128);
        assert!(v.overlaps(&expected));

        let v0 = v_function(&c, 0, &exact(2), 64).unwrap();
        assert!((v0.mid_f64() - 0.9159655942).abs() < 1e-9);

        for s in [3u64, 7, 20] {
            let v1 = v_function(&c, 1, &exact(s), 128).unwrap();
            assert_eq!(v1, l_chi4(&exact(s), 128).unwrap());
        }
    }

    #[test]
    fn first_predictions() {
        let c = PrimeChain::from_oracle(30);
        let policy = PrecisionPolicy::default();
        let p1 = predict_mod4(&c, 1, &ExponentPolicy::Proven, &policy).unwrap();
        assert_eq!(p1.predicted, Residue::Three);
        assert_eq!(p1.actual, 3);
        let p2 = predict_mod4(&c, 2, &ExponentPolicy::Proven, &policy).unwrap();
        assert_eq!(p2.predicted, Residue::One);
        assert_eq!(p2.p_next, 5);
        assert!(p2.matches());
        for n in 1..=30 {
            let p = predict_mod4(&c, n, &ExponentPolicy::Proven, &policy).unwrap();
            assert!(p.matches(), "n = {n}");
        }
        assert!(predict_mod4(&c, 0, &ExponentPolicy::Proven, &policy).is_err());
    }

    #[test]
    fn sign_follows_character_of_next_prime() {
        let c = PrimeChain::from_oracle(25);
        let chi = CharacterMod4;
        for n in 1..=24 {
            let p_n = c.p(n).unwrap();
            let s = 2.0 * p_n as f64;
            let bits = PrecisionPolicy::default().bits_for(s, p_n);
            let v = v_function(&c, n, &BallReal::from_f64(s, bits).unwrap(), bits).unwrap();
            let sign = match v.cmp_int(1) {
                Some(Ordering::Greater) => 1,
                Some(Ordering::Less) => -1,
                _ => 0,
            };
            assert_eq!(sign, chi.value(c.p(n + 1).unwrap()), "n = {n}");
        }
    }
}
