use std::collections::BTreeSet;

use gsp4::eigenform::{lambda_stream_on, AngleStreamModel, EigenformSpec, Gl2Source, LambdaStream};
use gsp4::sums::{exceedance_count, prime_pi, sieve, sign_change_report, sum_cross, sum_square, PrimeTable};
use proptest::prelude::*;

const X: u64 = 1_000_000;

fn yoshida(a: u64, b: u64, ramified: &[u64]) -> EigenformSpec {
    let src = |s: u64| Gl2Source::Angles { label: format!("sc{s}"), model: AngleStreamModel::semicircle(s) };
    EigenformSpec::yoshida(format!("Y{a}{b}"), src(a), src(b), ramified.iter().copied()).unwrap()
}

fn stream(spec: &EigenformSpec, t: &PrimeTable) -> LambdaStream {
    lambda_stream_on(spec, t, t.limit).unwrap()
}

#[test]
fn removing_ten_primes_barely_moves_ratios() {
    let t = sieve(X);
    let s: BTreeSet<u64> = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29].into();
    let f = stream(&yoshida(1, 2, &[]), &t);
    let g = stream(&yoshida(3, 4, &[]), &t);
    let none = BTreeSet::new();
    let pairs = [
        (sum_square(&f, &t, X, &none).unwrap().ratio, sum_square(&f, &t, X, &s).unwrap().ratio),
        (sum_cross(&f, &g, &t, X, &none).unwrap().ratio, sum_cross(&f, &g, &t, X, &s).unwrap().ratio),
    ];
    for (full, cut) in pairs {
        assert!((full - cut).abs() <= 0.01, "{full} vs {cut}");
    }
    let a = sign_change_report(&f, &g, &t, X, 0.5, 2, &none).unwrap();
    let b = sign_change_report(&f, &g, &t, X, 0.5, 2, &s).unwrap();
    assert!((a.density - b.density).abs() <= 0.01);
    assert!((a.alpha - b.alpha).abs() <= 0.01);
}

#[test]
fn constant_stream_ratios() {
    let t = sieve(X);
    let one = LambdaStream::constant(1.0, &t, X);
    let none = BTreeSet::new();
    assert!((sum_square(&one, &t, X, &none).unwrap().ratio - 1.0).abs() < 0.1);
    let e = exceedance_count(&one, &t, X, 0.5, &none).unwrap();
    assert_eq!(e.count, 78_498);
    assert!((e.alpha_hat - 1.0).abs() < 0.1);
}

#[test]
fn negated_stream_gives_minus_m() {
    let t = sieve(X);
    let f = stream(&yoshida(5, 6, &[]), &t);
    let none = BTreeSet::new();
    let r = sum_cross(&f, &f.scaled(-1.0), &t, X, &none).unwrap().ratio;
    assert!((r + 2.0).abs() <= 0.2, "{r}");
    let report = sign_change_report(&f, &f.scaled(-1.0), &t, X, 0.5, 2, &none).unwrap();
    // every nonzero product is negative
    assert_eq!(report.count_neg_product, report.prime_count);
    assert!(report.density_meets_bound);
}

#[test]
fn class_y_independent_streams() {
    let t = sieve(X);
    let none = BTreeSet::new();
    let f = stream(&yoshida(7, 8, &[]), &t);
    let g = stream(&yoshida(9, 10, &[]), &t);
    assert!((sum_square(&f, &t, X, &none).unwrap().ratio - 2.0).abs() <= 0.2);
    assert!(sum_cross(&f, &g, &t, X, &none).unwrap().ratio.abs() <= 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn report_counts_are_bounded(
        a in 0u64..1000, b in 1000u64..2000, x in 100u64..20_000,
        s in prop::collection::btree_set(prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 97, 101, 19_997]), 0..5),
    ) {
        let t = sieve(20_000);
        let f = stream(&yoshida(a, a + 5000, &[]), &t);
        let g = stream(&yoshida(b, b + 5000, &[]), &t);
        let r = sign_change_report(&f, &g, &t, x, 0.5, 2, &s).unwrap();
        let removed = s.iter().filter(|&&p| p <= x).count();
        prop_assert_eq!(r.prime_count, prime_pi(&t, x).unwrap() - removed);
        prop_assert!(r.count_neg_product <= r.prime_count);
        prop_assert!(r.count_exceed <= r.prime_count);
        prop_assert!(r.weissauer_holds);
        prop_assert!(r.proof_inequality_holds);
        let expected = r.c * r.c * (16.0 * r.alpha + f64::from(r.m) - 16.0) / 512.0;
        prop_assert!((r.bound - expected).abs() < 1e-15);
        prop_assert!((r.density - r.count_neg_product as f64 / (x as f64 / (x as f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn cross_sum_is_linear_in_scale(seed in 0u64..500, scale in -3.0f64..3.0) {
        let t = sieve(5000);
        let none = BTreeSet::new();
        let f = stream(&yoshida(seed, seed + 1000, &[]), &t);
        let g = stream(&yoshida(seed + 2000, seed + 3000, &[]), &t);
        let base = sum_cross(&f, &g, &t, 5000, &none).unwrap().sum;
        let scaled = sum_cross(&f.scaled(scale), &g, &t, 5000, &none).unwrap().sum;
        prop_assert!((scaled - scale * base).abs() <= 1e-9 * (1.0 + base.abs() * scale.abs()));
    }
}
