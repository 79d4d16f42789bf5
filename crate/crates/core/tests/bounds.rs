use irobd_core::bounds::{
    bound_cor1, bound_cor1_opt, bound_thm1, bound_thm2, lower_bound_thm3, robd_linear_ratio_prior,
};
use proptest::prelude::*;

const GOLDEN: f64 = 1.618_033_988_749_895;

#[test]
fn cor1_examples() {
    let (lambda, value) = bound_cor1_opt(1.0, 0.0).unwrap();
    assert!((lambda - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
    assert!((value - GOLDEN).abs() < 1e-15);
    let (_, value) = bound_cor1_opt(1.0, 1.0).unwrap();
    assert!((value - (2.0 + 5f64.sqrt())).abs() < 1e-14);
    let (_, value) = bound_cor1_opt(2.0, 0.5).unwrap();
    let expected = 0.5 * (1.0 + 0.625 + (1.625f64.powi(2) + 2.0).sqrt());
    assert!((value - expected).abs() < 1e-14);

    for &(m, l) in &[(1.0, 0.0), (1.0, 1.0), (0.5, 0.3), (4.0, 1.0), (1e-3, 2.0)] {
        let (lambda, value) = bound_cor1_opt(m, l).unwrap();
        let beta = (1.0 + l) * (1.0 + l);
        let a = 1.0 / lambda;
        let b = (m + lambda) / (m + (1.0 - beta) * lambda);
        assert!((a - b).abs() <= 1e-12 * a, "{m} {l}: {a} vs {b}");
        assert!((bound_cor1(m, l, lambda).unwrap() - value).abs() <= 1e-12 * value);
    }
    assert!(bound_cor1(1.0, 1.0, 1.0).is_err());
    assert!(bound_cor1(1.0, 0.0, 0.0).is_err());
}

#[test]
fn thm1_examples() {
    let f = bound_thm1(1.0, 3.0, 1, 0.4, 0, 0.5).unwrap();
    assert_eq!(f, (1.0f64 / 0.5).max(1.5 / (1.0 + (1.0 - 0.16) * 0.5)));
    assert_eq!(bound_thm1(1.0, 1.0, 1, 0.0, 2, 1.0).unwrap(), 1.0);
    let base: f64 = 2.0 + 2.0 * 4.0 * 0.09;
    let k2 = bound_thm1(1.0, 2.0, 2, 0.3, 2, 0.5).unwrap();
    let k4 = bound_thm1(1.0, 2.0, 2, 0.3, 4, 0.5).unwrap();
    assert!((k4 / k2 - base.powi(2)).abs() < 1e-12);
    assert!(bound_thm1(1.0, 1.0, 2, 1.0, 1, 1.0).is_err());
}

#[test]
fn thm2_examples() {
    assert_eq!(bound_thm2(1.0, 1.0, 0.5, 0, 1.0).unwrap(), 2.0 / 1.75);
    assert!((bound_thm2(2.0, 1.0, 0.5, 2, 1.0).unwrap() - 1.5f64.powi(2) * 1.0f64.max(3.0 / 2.75)).abs() < 1e-14);
    assert_eq!(bound_thm2(1.0, 1.0, 0.0, 0, 2.0).unwrap(), 1.0);
    assert!(bound_thm2(1.0, 1.0, 0.7, 1, 0.0).is_err());
}

#[test]
fn thm3_examples() {
    assert_eq!(lower_bound_thm3(1.0, 2.0, 3).unwrap(), 21.0);
    assert_eq!(lower_bound_thm3(2.5, 3.0, 1).unwrap(), 2.5);
    let near = lower_bound_thm3(1.5, 1.0 + 1e-9, 7).unwrap();
    assert!((near - 1.5 * 7.0).abs() < 1e-6);
    let just_above = lower_bound_thm3(1.0, 1.0 + 1e-4, 5).unwrap();
    let just_below = lower_bound_thm3(1.0, 1.0 + 4e-5, 5).unwrap();
    assert!(just_above > just_below && just_above - just_below < 1e-2);
    assert!(lower_bound_thm3(1.0, 1.0, 2).is_err());
}

#[test]
fn prior_ratio_examples() {
    assert!((robd_linear_ratio_prior(1.0, 1.0).unwrap() - GOLDEN).abs() < 1e-15);
    assert!((robd_linear_ratio_prior(1e6, 2.0).unwrap() - 1.0).abs() < 1e-3);
}

proptest! {
    #[test]
    fn cor1_opt_matches_prior_ratio(m in 0.01..50.0f64, l in 0.0..5.0f64) {
        let (_, v) = bound_cor1_opt(m, l).unwrap();
        let p = robd_linear_ratio_prior(m, 1.0 + l).unwrap();
        prop_assert!((v - p).abs() <= 1e-12 * v);
    }

    #[test]
    fn cor1_opt_is_the_minimum(m in 0.05..10.0f64, l in 0.0..2.0f64, t in 0.01..0.99f64) {
        let (lambda, value) = bound_cor1_opt(m, l).unwrap();
        let limit = m / (l * (l + 2.0));
        let probe = if limit.is_finite() { t * limit } else { 10.0 * t };
        if let Ok(b) = bound_cor1(m, l, probe) {
            prop_assert!(b >= value * (1.0 - 1e-12), "{} at {} vs {} at {}", b, probe, value, lambda);
        }
    }
}

#[test]
fn bounds_are_monotone_on_grids() {
    let ms = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    let ls = [0.0, 0.1, 0.3, 0.6, 1.0, 1.5];
    let alphas = [0.0, 0.2, 0.5, 0.8, 0.95];
    let ks = [0usize, 1, 2, 3, 5, 8];
    let lambda = 0.3;
    let nondecreasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let nonincreasing = |xs: &[f64]| xs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));

    for &m in &ms {
        let row: Vec<f64> = ls.iter().map(|&l| bound_cor1_opt(m, l).unwrap().1).collect();
        assert!(nondecreasing(&row));
        for &a in &alphas {
            let row: Vec<f64> = ks.iter().map(|&k| bound_thm2(m, 1.5, a, k, lambda).unwrap()).collect();
            assert!(nondecreasing(&row));
        }
        for &k in &ks {
            let row: Vec<f64> = alphas.iter().map(|&a| bound_thm2(m, 1.5, a, k, lambda).unwrap()).collect();
            assert!(nondecreasing(&row));
            let row: Vec<f64> = [0.0, 0.2, 0.4, 0.6].iter().map(|&l| bound_thm1(m, 1.5, 1, l, k, lambda).unwrap()).collect();
            assert!(nondecreasing(&row));
        }
    }
    for &l in &ls {
        let row: Vec<f64> = ms.iter().map(|&m| bound_cor1_opt(m, l).unwrap().1).collect();
        assert!(nonincreasing(&row));
    }
    for &a in &alphas {
        let row: Vec<f64> = ms.iter().map(|&m| bound_thm2(m, 1.5, a, 3, lambda).unwrap()).collect();
        assert!(nonincreasing(&row));
        let row: Vec<f64> = ms.iter().map(|&m| bound_thm1(m, 1.5, 1, a * 0.7, 3, lambda).unwrap()).collect();
        assert!(nonincreasing(&row));
    }
    for &m in &ms {
        for &a in &[1.1, 1.5, 2.0, 3.0] {
            let row: Vec<f64> = (1..8).map(|k| lower_bound_thm3(m, a, k).unwrap()).collect();
            assert!(nondecreasing(&row));
        }
        for &k in &[1usize, 2, 4] {
            let row: Vec<f64> = [1.05, 1.2, 1.5, 2.0].iter().map(|&a| lower_bound_thm3(m, a, k).unwrap()).collect();
            assert!(nondecreasing(&row));
        }
    }
    // The lower bound scales with m rather than shrinking.
    let row: Vec<f64> = ms.iter().map(|&m| lower_bound_thm3(m, 2.0, 3).unwrap()).collect();
    assert!(nondecreasing(&row));
}
