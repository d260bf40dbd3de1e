use std::cmp::Ordering;

use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use primerec::classical::SquarefreeDivisorStream;
use primerec::precision::{certified_ceiling, certified_floor, BallReal, CertifiedInt};
use primerec::recurrence::{h_of_s, tail_bound, PrimeChain};
use primerec::special::{zeta_real, CharacterMod4};
use primerec::verify::exp_rational_bounds;

const PREC: u32 = 96;

fn rational() -> impl Strategy<Value = Rational> {
    (-(1i64 << 40)..=(1i64 << 40), 1i64..=(1 << 24)).prop_map(|(n, d)| Rational::from((n, d)))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=(1i64 << 40), 1i64..=(1 << 24)).prop_map(|(n, d)| Rational::from((n, d)))
}

/// A ball around `q`, optionally widened by `extra * 2^-shift`.
fn ball(q: &Rational, extra: u32, shift: i32) -> BallReal {
    let b = BallReal::from_rational(q, PREC);
    if extra == 0 {
        return b;
    }
    let rad = Float::with_val(64, b.rad() + (Float::with_val(64, extra) >> shift));
    BallReal::new(b.mid().clone(), rad).unwrap()
}

fn points(b: &BallReal) -> Vec<Rational> {
    let (lo, hi) = b.exact_endpoints();
    vec![lo, b.mid().to_rational().unwrap(), hi]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn add_sub_mul_contain_exact_results(a in rational(), b in rational(), e in 0u32..100, sh in 60i32..120) {
        let (x, y) = (ball(&a, e, sh), ball(&b, e, sh));
        let (sum, diff, prod) = (&x + &y, &x - &y, &x * &y);
        for p in points(&x) {
            for q in points(&y) {
                prop_assert!(sum.contains_rational(&Rational::from(&p + &q)));
                prop_assert!(diff.contains_rational(&Rational::from(&p - &q)));
                prop_assert!(prod.contains_rational(&Rational::from(&p * &q)));
            }
        }
    }

    #[test]
    fn pow_int_contains_exact_powers(a in rational(), k in -6i64..=8, e in 0u32..100) {
        prop_assume!(a != 0);
        let x = ball(&a, e, 90);
        if let Ok(r) = x.pow_int(k) {
            for p in points(&x) {
                prop_assert!(r.contains_rational(&Rational::from((&p).pow(k as i32))));
            }
        } else {
            prop_assert!(k < 0 && x.contains_zero());
        }
    }

    #[test]
    fn root_brackets_every_point(a in positive_rational(), k in 2u32..=9, e in 0u32..100) {
        let x = ball(&a, e, 100);
        let r = x.root(k).unwrap();
        let (lo, hi) = r.exact_endpoints();
        let (xlo, xhi) = x.exact_endpoints();
        prop_assert!(lo >= 0);
        prop_assert!(Rational::from((&lo).pow(k)) <= xlo && xhi <= Rational::from((&hi).pow(k)));
    }

    #[test]
    fn ceiling_and_floor_are_never_wrong(n in -(1i64 << 30)..(1i64 << 30), d in 1i64..4096, prec in 8u32..=128, e in 0u32..4) {
        let q = Rational::from((n, d));
        let x = ball(&q, e, prec as i32);
        if let CertifiedInt::Value(c) = certified_ceiling(&x) {
            prop_assert_eq!(c, Integer::from(q.ceil_ref()));
        }
        if let CertifiedInt::Value(f) = certified_floor(&x) {
            prop_assert_eq!(f, Integer::from(q.floor_ref()));
        }
    }

    #[test]
    fn character_is_completely_multiplicative(a in 1u64..100_000, b in 1u64..100_000) {
        let chi = CharacterMod4;
        prop_assert_eq!(chi.value(a * b), chi.value(a) * chi.value(b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn ln_and_exp_enclose_the_true_values(a in positive_rational(), t in -(8i64 << 20)..=(8i64 << 20)) {
        let x = BallReal::from_rational(&a, PREC);
        let (lo, hi) = x.ln().unwrap().exact_endpoints();
        let (xlo, xhi) = x.exact_endpoints();
        prop_assert!(exp_rational_bounds(&lo, PREC).1 <= xlo);
        prop_assert!(xhi <= exp_rational_bounds(&hi, PREC).0);

        let q = Rational::from((t, 1i64 << 20));
        let y = BallReal::from_rational(&q, PREC);
        let (rlo, rhi) = y.exp().exact_endpoints();
        prop_assert!(rlo <= exp_rational_bounds(&q, PREC).0);
        prop_assert!(exp_rational_bounds(&q, PREC).1 <= rhi);
    }

    #[test]
    fn squarefree_stream_is_exactly_the_squarefree_divisors(n in 1usize..=7, d_max in 1u64..600) {
        let primes = &[2u64, 3, 5, 7, 11, 13, 17][..n];
        let mut got: Vec<(u64, i8)> = SquarefreeDivisorStream::new(primes, d_max).collect();
        got.sort();
        let mut want = Vec::new();
        for mask in 0u32..(1 << n) {
            let d: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| primes[i]).product();
            if d <= d_max {
                want.push((d, if mask.count_ones() % 2 == 0 { 1 } else { -1 }));
            }
        }
        want.sort();
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tail_bound_decreases_in_m(m in 2u64..10_000, s in 1.05f64..40.0) {
        let sb = BallReal::from_f64(s, 128).unwrap();
        let a = tail_bound(m, &sb).unwrap();
        let b = tail_bound(m + 1, &sb).unwrap();
        prop_assert!(b.upper() < a.lower());
    }

    #[test]
    fn zeta_refinement_nests(s in 1.2f64..30.0) {
        let sb = BallReal::from_f64(s, 256).unwrap();
        let coarse = zeta_real(&sb, 64).unwrap();
        let fine = zeta_real(&sb, 160).unwrap();
        prop_assert!(fine.overlaps(&coarse));
        prop_assert!(fine.width() <= coarse.width());
    }

    #[test]
    fn h_stays_below_the_next_prime(n in 1usize..=12, frac in 0.05f64..1.0) {
        let chain = PrimeChain::from_oracle(n + 1);
        let p_n = chain.p(n).unwrap();
        let s = 1.5 + frac * (2.0 * p_n as f64 - 1.5);
        let bits = (s * ((2 * p_n) as f64).log2()).ceil() as u32 + 96;
        let h = h_of_s(&chain, n, &BallReal::from_f64(s, bits).unwrap(), bits).unwrap();
        prop_assert_eq!(h.cmp_int(chain.p(n + 1).unwrap() as i64), Some(Ordering::Less));
    }
}
