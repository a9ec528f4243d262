use efpf_core::numerics::{
    falling_factorial, log_binomial, log_gamma, log_sum, rising_factorial, LogReal,
};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exact_binomial(a: u64, b: u64) -> BigUint {
    (0..b).fold(BigUint::one(), |acc, i| acc * (a - i) / (i + 1))
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 900;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

#[test]
fn log_binomial_matches_big_integers() {
    for a in 0..=60u64 {
        for b in 0..=a {
            let want = ln_big(&exact_binomial(a, b));
            let got = log_binomial(a, b).unwrap();
            assert!(
                (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                "C({a},{b})"
            );
        }
    }
    let want = ln_big(&exact_binomial(100, 50));
    assert!((log_binomial(100, 50).unwrap() - want).abs() <= 1e-13 * want);
    for (a, b) in [(1_000_000u64, 3u64), (1_000_000, 17), (500_000, 250)] {
        let want = ln_big(&exact_binomial(a, b));
        assert!((log_binomial(a, b).unwrap() - want).abs() <= 1e-13 * want);
    }
}

#[test]
fn log_sum_of_many_mixed_terms() {
    // signed powers of two: the exact sum is an integer multiple of 2^-40
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut exact: i128 = 0;
    let mut terms = Vec::with_capacity(1_000_000);
    for _ in 0..1_000_000 {
        let e: i32 = rng.random_range(-40..=40);
        let neg = rng.random_bool(0.45);
        let scaled = 1i128 << (e + 40);
        exact += if neg { -scaled } else { scaled };
        let v = 2f64.powi(e);
        terms.push(LogReal::from_f64(if neg { -v } else { v }));
    }
    let want = exact as f64 * 2f64.powi(-40);
    let got = log_sum(&terms).to_f64();
    assert!(((got - want) / want).abs() <= 1e-13, "{got} vs {want}");
}

proptest! {
    #[test]
    fn rising_factorial_recurrence(x in -20.0f64..20.0, m in 0u64..200) {
        let lhs = rising_factorial(x, m, 1.0) * LogReal::from_f64(x + m as f64);
        let rhs = rising_factorial(x, m + 1, 1.0);
        prop_assert_eq!(lhs.sign(), rhs.sign());
        if !rhs.is_zero() {
            prop_assert!(lhs.relative_gap(rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn rising_factorial_matches_gamma_ratio(x in 0.1f64..100.0, m in 0u64..=500) {
        let gamma_route = log_gamma(x + m as f64).unwrap() - log_gamma(x).unwrap();
        let product = rising_factorial(x, m, 1.0).log_mag();
        prop_assert!((product - gamma_route).abs() <= 1e-11 * product.abs().max(1.0));
    }

    #[test]
    fn falling_is_shifted_rising(num in -1920i64..1920, m in 0u64..60) {
        // multiples of 1/64 keep x - m + 1 exact, so both routes see the same factors
        let x = num as f64 / 64.0;
        let a = falling_factorial(x, m);
        let b = rising_factorial(x - m as f64 + 1.0, m, 1.0);
        prop_assert_eq!(a.sign(), b.sign());
        if !b.is_zero() {
            prop_assert!(a.relative_gap(b).abs() < 1e-13);
        }
    }

    #[test]
    fn log_sum_is_permutation_invariant(
        xs in prop::collection::vec((-1i8..=1, -50.0f64..50.0), 1..200),
        seed in any::<u64>(),
    ) {
        let vals: Vec<LogReal> = xs.iter().map(|&(s, l)| LogReal::new(s, l)).collect();
        let mut shuffled = vals.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let a = log_sum(&vals);
        let b = log_sum(&shuffled);
        let max_mag = vals.iter().map(|v| v.log_mag()).fold(f64::NEG_INFINITY, f64::max);
        // skip sums cancelled below 1e-6 of the largest term
        if !a.is_zero() && a.log_mag() - max_mag > -13.8 {
            prop_assert!(a.relative_gap(b).abs() < 1e-12);
        }
    }

    #[test]
    fn log_real_round_trip(x in -1e12f64..1e12) {
        prop_assume!(x != 0.0);
        let back = LogReal::from_f64(x).to_f64();
        prop_assert!(((back - x) / x).abs() < 1e-14);
    }
}
