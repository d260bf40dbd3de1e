//! End-to-end verification: one check per acceptance criterion, plus the
//! exact-rational reference evaluations the containment checks rely on.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer, Rational};
use rug::ops::Pow;

use crate::classical::{gandhi_next_prime, golomb_trefeu_next_prime};
use crate::error::Result;
use crate::mod4::{predict_mod4, Mod4Prediction, Residue};
use crate::oracle;
use crate::precision::{certified_ceiling, BallReal, CertifiedInt, PrecisionPolicy};
use crate::recurrence::{
    dirichlet_series_direct, dirichlet_series_product, generate_chain, h_of_s, tail_bound, ExponentPolicy,
    PrimeChain,
};
use crate::scan::{scan_range, ScanRecord, DEFAULT_TOL};

/// Pass/fail line for one criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(id: u8, title: &'static str, passed: bool, detail: String) -> Self {
        Outcome { id, title, passed, detail }
    }

    fn from_result(id: u8, title: &'static str, result: Result<Outcome>) -> Self {
        result.unwrap_or_else(|e| Outcome::new(id, title, false, format!("error: {e}")))
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("[{tag}] criterion {}: {} -- {}", self.id, self.title, self.detail)
    }
}

pub const SCAN_MAX_N: usize = 120;
pub const RATIO_WINDOW: (usize, usize) = (60, 120);
pub const RATIO_MEAN_RANGE: (f64, f64) = (0.2, 0.45);
pub const CONTAINMENT_CASES: usize = 10_000;

const T1: &str = "effective recurrence reproduces the first 100 primes";
const T2: &str = "minimal exponents: s_n <= 2 p_n, ratio profile";
const T3: &str = "h(2 p_n) strictly inside (p_{n+1} - 1, p_{n+1}) for n <= 50";
const T4: &str = "product and direct forms of D_n(s) intersect";
const T5: &str = "integral tail bound dominates exact remainders";
const T6: &str = "mod-4 predictor matches for n = 1..100";
const T7: &str = "Gandhi and Golomb-Trefeu match the oracle for n <= 15";
const T8: &str = "randomized enclosure soundness";

/// Criterion 1 on an already generated list of primes.
pub fn check_chain(primes: &[u64]) -> Outcome {
    let oracle = oracle::sieve_primes(100);
    let first_bad = primes.iter().zip(&oracle).position(|(a, b)| a != b);
    let passed = primes.len() == 100 && first_bad.is_none();
    let detail = match first_bad {
        Some(i) => format!("mismatch at n = {}: {} vs {}", i + 1, primes[i], oracle[i]),
        None => format!("{} primes, last {}", primes.len(), primes.last().copied().unwrap_or(0)),
    };
    Outcome::new(1, T1, passed, detail)
}

pub fn criterion_chain(policy: &PrecisionPolicy) -> Outcome {
    Outcome::from_result(
        1,
        T1,
        generate_chain(100, &ExponentPolicy::Proven, policy).map(|chain| check_chain(chain.primes())),
    )
}

/// Criterion 2 on scan records for `n = 1..=120`.
pub fn check_scan(records: &[ScanRecord]) -> Outcome {
    let complete = records.len() == SCAN_MAX_N && records.iter().enumerate().all(|(i, r)| r.n == i + 1);
    let bound_ok = records.iter().all(|r| r.s_n <= 2.0 * r.p_n as f64);
    let over_one: Vec<usize> = records.iter().filter(|r| r.ratio > 1.0).map(|r| r.n).collect();
    let window: Vec<f64> = records
        .iter()
        .filter(|r| (RATIO_WINDOW.0..=RATIO_WINDOW.1).contains(&r.n))
        .map(|r| r.ratio)
        .collect();
    let mean = window.iter().sum::<f64>() / window.len().max(1) as f64;
    let mean_ok = !window.is_empty() && mean >= RATIO_MEAN_RANGE.0 && mean <= RATIO_MEAN_RANGE.1;
    let max = records.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    let conjecture = if over_one.is_empty() {
        "s_n <= p_n for all n".to_string()
    } else {
        format!("s_n > p_n at n = {over_one:?} (report-only)")
    };
    Outcome::new(
        2,
        T2,
        complete && bound_ok && mean_ok,
        format!(
            "{} records, s_n <= 2 p_n: {bound_ok}, {conjecture}, max ratio {max:.4}, mean ratio over n in [{}, {}] = {mean:.4} (want [{}, {}])",
            records.len(),
            RATIO_WINDOW.0,
            RATIO_WINDOW.1,
            RATIO_MEAN_RANGE.0,
            RATIO_MEAN_RANGE.1
        ),
    )
}

pub fn criterion_scan(policy: &PrecisionPolicy) -> Outcome {
    let chain = PrimeChain::from_oracle(SCAN_MAX_N + 1);
    Outcome::from_result(2, T2, scan_range(&chain, 1, SCAN_MAX_N, DEFAULT_TOL, policy).map(|r| check_scan(&r)))
}

pub fn criterion_sandwich(policy: &PrecisionPolicy) -> Outcome {
    let run = || -> Result<Outcome> {
        let chain = PrimeChain::from_oracle(51);
        let mut failures = Vec::new();
        let mut slack = f64::INFINITY;
        for n in 1..=50 {
            let p_n = chain.p(n).unwrap();
            let next = chain.p(n + 1).unwrap() as i64;
            let s = 2.0 * p_n as f64;
            let bits = policy.bits_for(s, p_n);
            let h = h_of_s(&chain, n, &BallReal::from_f64(s, bits)?, bits)?;
            let inside = h.cmp_int(next - 1) == Some(Ordering::Greater) && h.cmp_int(next) == Some(Ordering::Less);
            if !inside {
                failures.push(n);
            }
            slack = slack.min(next as f64 - h.mid_f64());
        }
        Ok(Outcome::new(
            3,
            T3,
            failures.is_empty(),
            if failures.is_empty() {
                format!("50/50 inside, smallest gap p_(n+1) - h = {slack:.3e}")
            } else {
                format!("outside for n = {failures:?}")
            },
        ))
    };
    Outcome::from_result(3, T3, run())
}

pub fn criterion_product_direct(policy: &PrecisionPolicy) -> Outcome {
    let run = || -> Result<Outcome> {
        let chain = PrimeChain::from_oracle(11);
        let mut cases = 0;
        let mut failures = Vec::new();
        for n in 0..=10usize {
            let p_n = chain.p(n).unwrap_or(1);
            let mut exponents = vec![4.0, 6.0, 10.0];
            if n >= 1 {
                exponents.push(2.0 * p_n as f64);
            }
            for s in exponents {
                let bits = policy.bits_for(s, p_n.max(2));
                let sb = BallReal::from_f64(s, bits)?;
                let cutoff = (p_n * p_n).max(1000);
                let product = dirichlet_series_product(&chain, n, &sb, bits)?;
                let direct = dirichlet_series_direct(&chain, n, &sb, cutoff, bits)?;
                cases += 1;
                if !product.overlaps(&direct) {
                    failures.push((n, s));
                }
            }
        }
        Ok(Outcome::new(
            4,
            T4,
            failures.is_empty(),
            if failures.is_empty() {
                format!("{cases}/{cases} (n, s) pairs intersect")
            } else {
                format!("disjoint at {failures:?}")
            },
        ))
    };
    Outcome::from_result(4, T4, run())
}

/// `zeta(s)` for even `s` in {2, 4, 6} from the closed forms `pi^s * r`.
fn zeta_even_closed_form(s: u64, prec: u32) -> BallReal {
    let factor = match s {
        2 => Rational::from((1, 6)),
        4 => Rational::from((1, 90)),
        6 => Rational::from((1, 945)),
        _ => unreachable!("closed form only for s in {{2, 4, 6}}"),
    };
    &BallReal::pi(prec).pow_int(s as i64).unwrap() * &BallReal::from_rational(&factor, prec)
}

pub fn criterion_tail() -> Outcome {
    let run = || -> Result<Outcome> {
        let prec = 256;
        let mut failures = Vec::new();
        let mut cases = 0;
        for s in [2u64, 4, 6] {
            let sb = BallReal::exact_u64(s, prec);
            let zeta = zeta_even_closed_form(s, prec);
            for m in [3u64, 5, 10] {
                let mut head = BallReal::exact_u64(0, prec);
                for k in 1..m {
                    head = &head + &BallReal::inv_pow_u64(k, &sb, prec)?;
                }
                let remainder = &zeta - &head;
                let mut brute = BallReal::exact_u64(0, prec);
                for k in m..=10_000 {
                    brute = &brute + &BallReal::inv_pow_u64(k, &sb, prec)?;
                }
                let bound = tail_bound(m, &sb)?;
                cases += 1;
                let ok = remainder.upper() <= bound.lower() && brute.upper() <= bound.lower();
                if !ok {
                    failures.push((m, s));
                }
            }
        }
        Ok(Outcome::new(
            5,
            T5,
            failures.is_empty(),
            if failures.is_empty() {
                format!("{cases}/{cases} (m, s) pairs bounded")
            } else {
                format!("bound fails at {failures:?}")
            },
        ))
    };
    Outcome::from_result(5, T5, run())
}

/// Criterion 6 on predictions for `n = 1..=100`.
pub fn check_mod4(predictions: &[(usize, Residue, u64)]) -> Outcome {
    let matches = predictions.iter().filter(|(_, r, a)| r.as_u64() == Some(*a)).count();
    let indeterminate = predictions.iter().filter(|(_, r, _)| *r == Residue::Indeterminate).count();
    let complete = predictions.len() == 100 && predictions.iter().enumerate().all(|(i, p)| p.0 == i + 1);
    Outcome::new(
        6,
        T6,
        complete && matches == 100 && indeterminate == 0,
        format!("{matches}/{} matches, {indeterminate} indeterminate", predictions.len()),
    )
}

pub fn criterion_mod4(policy: &PrecisionPolicy) -> Outcome {
    let chain = PrimeChain::from_oracle(100);
    let preds: Result<Vec<Mod4Prediction>> =
        (1..=100).map(|n| predict_mod4(&chain, n, &ExponentPolicy::Proven, policy)).collect();
    Outcome::from_result(
        6,
        T6,
        preds.map(|p| check_mod4(&p.iter().map(|x| (x.n, x.predicted, x.actual)).collect::<Vec<_>>())),
    )
}

pub fn criterion_classical(policy: &PrecisionPolicy) -> Outcome {
    let run = || -> Result<Outcome> {
        let chain = PrimeChain::from_oracle(16);
        let mut failures = Vec::new();
        for n in 1..=15 {
            let want = chain.p(n + 1).unwrap();
            let g = gandhi_next_prime(&chain, n, policy)?;
            let window_ok = g
                .window
                .as_ref()
                .is_some_and(|w| w.cmp_int(1) == Some(Ordering::Greater) && w.cmp_int(2) == Some(Ordering::Less));
            if g.prime != want || !window_ok {
                failures.push(format!("gandhi n={n}"));
            }
            for base in [2u64, 3, 10] {
                if golomb_trefeu_next_prime(&chain, n, base, policy)?.prime != want {
                    failures.push(format!("trefeu b={base} n={n}"));
                }
            }
        }
        Ok(Outcome::new(
            7,
            T7,
            failures.is_empty(),
            if failures.is_empty() {
                "gandhi 15/15 with certified window in (1, 2); trefeu 45/45 over bases 2, 3, 10".into()
            } else {
                format!("failures: {}", failures.join(", "))
            },
        ))
    };
    Outcome::from_result(7, T7, run())
}

/// Bounds `lower <= exp(q) <= upper` from the Taylor series with an explicit
/// remainder, in exact rational arithmetic. Accepts `|q| <= 64`.
pub fn exp_rational_bounds(q: &Rational, bits: u32) -> (Rational, Rational) {
    assert!(q.clone().abs() <= 64, "exp_rational_bounds: |q| too large");
    let target = Rational::from((1, Integer::from(1) << (bits + 40)));
    let mut sum = Rational::from(1);
    let mut term = Rational::from(1);
    let abs_q = q.clone().abs();
    let mut k = 1u32;
    loop {
        term *= q;
        term /= k;
        sum += &term;
        // |R_k| <= |q|^(k+1)/(k+1)! / (1 - |q|/(k+2)) once k + 2 > 2|q|
        if abs_q < Rational::from(k + 2) / 2u32 {
            let next = (term.clone().abs() * &abs_q) / (k + 1);
            let err = next * 2u32;
            if err < target {
                return (Rational::from(&sum - &err), sum + err);
            }
        }
        k += 1;
    }
}

fn rand_rational(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Rational {
    Rational::from((rng.random_range(-num..=num), rng.random_range(1..=den)))
}

/// Input ball around `q`: either rounded `q` itself or widened by a random radius.
fn rand_ball(rng: &mut ChaCha8Rng, q: &Rational, prec: u32) -> BallReal {
    let base = BallReal::from_rational(q, prec);
    if rng.random_bool(0.5) {
        return base;
    }
    let scale = rng.random_range(10..60);
    let extra = Float::with_val(64, rng.random_range(1u32..1000)) >> (scale + prec as i32 / 2);
    BallReal::new(base.mid().clone(), Float::with_val(64, base.rad() + extra)).unwrap()
}

/// Points whose images must all be enclosed: the two endpoints and the midpoint.
fn sample_points(b: &BallReal) -> [Rational; 3] {
    let (lo, hi) = b.exact_endpoints();
    [lo, b.mid().to_rational().unwrap(), hi]
}

/// Randomized containment checks for every ball operation and the certified ceiling.
pub fn containment_suite(cases: usize, seed: u64) -> Vec<(&'static str, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prec = 128;
    let mut report = Vec::new();
    let mut tally = |name: &'static str, f: &mut dyn FnMut(&mut ChaCha8Rng) -> bool| {
        let failures = (0..cases).filter(|_| !f(&mut rng)).count();
        report.push((name, cases, failures));
    };

    tally("add", &mut |rng| {
        let (a, b) = (rand_rational(rng, 1 << 40, 1 << 20), rand_rational(rng, 1 << 40, 1 << 20));
        let (x, y) = (rand_ball(rng, &a, prec), rand_ball(rng, &b, prec));
        let r = &x + &y;
        let d = &x - &y;
        sample_points(&x).iter().zip(sample_points(&y).iter()).all(|(p, q)| {
            r.contains_rational(&Rational::from(p + q)) && d.contains_rational(&Rational::from(p - q))
        })
    });
    tally("mul", &mut |rng| {
        let (a, b) = (rand_rational(rng, 1 << 30, 1 << 20), rand_rational(rng, 1 << 30, 1 << 20));
        let (x, y) = (rand_ball(rng, &a, prec), rand_ball(rng, &b, prec));
        let r = &x * &y;
        let (xs, ys) = (sample_points(&x), sample_points(&y));
        xs.iter().all(|p| ys.iter().all(|q| r.contains_rational(&Rational::from(p * q))))
    });
    tally("div", &mut |rng| {
        let a = rand_rational(rng, 1 << 30, 1 << 20);
        let mut b = rand_rational(rng, 1 << 30, 1 << 20);
        if b == 0 {
            b = Rational::from(1);
        }
        let (x, y) = (rand_ball(rng, &a, prec), rand_ball(rng, &b, prec));
        let Ok(r) = x.div(&y) else { return true };
        let (xs, ys) = (sample_points(&x), sample_points(&y));
        xs.iter().all(|p| ys.iter().all(|q| r.contains_rational(&Rational::from(p / q))))
    });
    tally("pow_int", &mut |rng| {
        let mut a = rand_rational(rng, 1 << 20, 1 << 16);
        if a == 0 {
            a = Rational::from((1, 3));
        }
        let k = rng.random_range(-7i64..=9);
        let x = rand_ball(rng, &a, prec);
        let Ok(r) = x.pow_int(k) else { return true };
        sample_points(&x).iter().all(|p| r.contains_rational(&Rational::from(p.pow(k as i32))))
    });
    tally("root", &mut |rng| {
        let a = Rational::from((rng.random_range(1i64..=1 << 40), rng.random_range(1i64..=1 << 20)));
        let k = rng.random_range(2u32..=7);
        let x = rand_ball(rng, &a, prec);
        let r = x.root(k).unwrap();
        let (lo, hi) = r.exact_endpoints();
        let (xlo, xhi) = x.exact_endpoints();
        // every y in x has y^(1/k) in r  <=>  lo^k <= xlo and xhi <= hi^k
        lo >= 0 && lo.pow(k) <= xlo && xhi <= hi.pow(k)
    });
    tally("ln", &mut |rng| {
        let a = Rational::from((rng.random_range(1i64..=1 << 30), rng.random_range(1i64..=1 << 20)));
        let x = rand_ball(rng, &a, prec);
        let r = x.ln().unwrap();
        let (lo, hi) = r.exact_endpoints();
        let (xlo, xhi) = x.exact_endpoints();
        // exp(lo) <= xlo and xhi <= exp(hi)
        exp_rational_bounds(&lo, prec).1 <= xlo && xhi <= exp_rational_bounds(&hi, prec).0
    });
    tally("exp", &mut |rng| {
        let a = Rational::from((rng.random_range(-(12i64 << 20)..=12 << 20), 1i64 << 20));
        let x = rand_ball(rng, &a, prec);
        let r = x.exp();
        let (rlo, rhi) = r.exact_endpoints();
        let (xlo, xhi) = x.exact_endpoints();
        rlo <= exp_rational_bounds(&xlo, prec).0 && exp_rational_bounds(&xhi, prec).1 <= rhi
    });
    tally("certified_ceiling", &mut |rng| {
        let q = if rng.random_bool(0.2) {
            Rational::from(rng.random_range(-1000i64..=1000))
        } else {
            rand_rational(rng, 1 << 24, 1 << 12)
        };
        let prec = rng.random_range(24u32..=128);
        let x = rand_ball(rng, &q, prec);
        match certified_ceiling(&x) {
            CertifiedInt::Value(c) => c == Integer::from(q.ceil_ref()),
            CertifiedInt::Indeterminate => true,
        }
    });
    report
}

pub fn criterion_containment(cases: usize) -> Outcome {
    let report = containment_suite(cases, 0x5eed);
    let failures: usize = report.iter().map(|r| r.2).sum();
    let detail = report.iter().map(|(name, n, f)| format!("{name} {}/{n}", n - f)).collect::<Vec<_>>().join(", ");
    Outcome::new(8, T8, failures == 0 && report.iter().all(|r| r.1 >= cases), detail)
}

/// Every criterion, in order.
pub fn run_all(policy: &PrecisionPolicy) -> Vec<Outcome> {
    vec![
        criterion_chain(policy),
        criterion_scan(policy),
        criterion_sandwich(policy),
        criterion_product_direct(policy),
        criterion_tail(),
        criterion_mod4(policy),
        criterion_classical(policy),
        criterion_containment(CONTAINMENT_CASES),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_bounds_bracket_known_values() {
        let (lo, hi) = exp_rational_bounds(&Rational::from(1), 100);
        let e = Float::with_val(200, 1).exp();
        assert!(lo < e.to_rational().unwrap() + Rational::from((1, Integer::from(1) << 190)));
        assert!(hi > e.to_rational().unwrap() - Rational::from((1, Integer::from(1) << 190)));
        assert!(Rational::from(&hi - &lo) < Rational::from((1, Integer::from(1) << 130)));
        let (lo, hi) = exp_rational_bounds(&Rational::from(-8), 100);
        assert!(lo > 0 && hi < Rational::from((1, 2980)));
    }

    #[test]
    fn small_containment_run() {
        let report = containment_suite(300, 7);
        for (name, n, f) in report {
            assert_eq!(f, 0, "{name}: {f}/{n} failures");
        }
    }

    #[test]
    fn scan_check_rejects_incomplete_data() {
        let rec = ScanRecord { n: 1, p_n: 2, p_next: 3, s_n: 1.6, ratio: 0.8, crossings_checked: 1 };
        assert!(!check_scan(&[rec]).passed);
        assert!(!check_chain(&[2, 3, 5]).passed);
    }
}
