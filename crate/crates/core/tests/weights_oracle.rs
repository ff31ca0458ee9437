//! Closed-form bootstrap weights against resampling and quadrature oracles.

use onfwer::normal;
use onfwer::weights::{
    bootstrap_weight_1s, bootstrap_weight_2s, threshold_weight, OneSampleStat, ResamplePlan, ThresholdPlan,
    TwoSampleStat,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Fraction of bootstrap statistics Z* ~ N(shift, 1) whose p-value exceeds λ.
fn shifted_normal_oracle(shift: f64, lambda: f64, draws: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..draws)
        .filter(|_| {
            let z: f64 = rng.sample::<f64, _>(StandardNormal) + shift;
            normal::upper_tail(z) > lambda
        })
        .count();
    let p = hits as f64 / draws as f64;
    (p, (p * (1.0 - p) / draws as f64).sqrt())
}

#[test]
fn one_sample_weight_matches_monte_carlo() {
    let stat = OneSampleStat { z: 3.0, n: 100 };
    let closed = bootstrap_weight_1s(&stat, &ResamplePlan::Sqrt, 0.5);
    let (mc, se) = shifted_normal_oracle(0.1f64.sqrt() * 3.0, 0.5, 1_000_000, 1);
    assert!((closed - mc).abs() <= 3.0 * se, "{closed} vs {mc} ± {se}");
    assert!((closed - 0.171_39).abs() < 1e-4);
}

#[test]
fn two_sample_weight_matches_monte_carlo() {
    let stat = TwoSampleStat {
        mean_x: 2.0 * 0.02f64.sqrt(),
        mean_y: 0.0,
        n1: 100,
        n2: 100,
    };
    let closed = bootstrap_weight_2s(&stat, &ResamplePlan::Sqrt, 0.5);
    let (mc, se) = shifted_normal_oracle(0.1f64.sqrt() * 2.0, 0.5, 1_000_000, 2);
    assert!((closed - mc).abs() <= 3.0 * se, "{closed} vs {mc} ± {se}");
}

#[test]
fn unbalanced_two_sample_shrinkage() {
    // n₁ = 400, n₂ = 100, m = 20 and 10: κ² = (1/400 + 1/100)/(1/20 + 1/10).
    let stat = TwoSampleStat {
        mean_x: 0.3,
        mean_y: 0.1,
        n1: 400,
        n2: 100,
    };
    let z = 0.2 / (1.0f64 / 400.0 + 1.0 / 100.0).sqrt();
    let kappa = ((1.0 / 400.0 + 1.0 / 100.0) / (1.0 / 20.0 + 1.0 / 10.0f64)).sqrt();
    let expected = normal::cdf(normal::quantile(0.6) - kappa * z);
    assert!((bootstrap_weight_2s(&stat, &ResamplePlan::Sqrt, 0.4) - expected).abs() < 1e-15);
}

/// Composite Simpson on [−12, 12] against the standard normal density.
fn expect_under_null(f: impl Fn(f64) -> f64) -> f64 {
    let (a, b, steps) = (-12.0, 12.0, 24_000);
    let h = (b - a) / steps as f64;
    let density = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = 0.0;
    for k in 0..=steps {
        let x = a + k as f64 * h;
        let w = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * f(x) * density(x);
    }
    acc * h / 3.0
}

#[test]
fn null_expectation_of_bootstrap_weight() {
    for &(n, lambda) in &[
        (25usize, 0.5),
        (25, 0.7),
        (100, 0.5),
        (100, 0.9),
        (10_000, 0.6),
        (7, 0.55),
    ] {
        let plan = ResamplePlan::Sqrt;
        let ratio = plan.size(n) as f64 / n as f64;
        let mean = expect_under_null(|z| bootstrap_weight_1s(&OneSampleStat { z, n }, &plan, lambda));
        let closed = normal::cdf(normal::quantile(1.0 - lambda) / (1.0 + ratio).sqrt());
        assert!((mean - closed).abs() < 1e-6, "n={n} λ={lambda}: {mean} vs {closed}");
        assert!(mean >= 1.0 - lambda - 1e-9, "n={n} λ={lambda}: {mean}");
    }
    // Below λ = 1/2 the mean falls short of 1 − λ.
    let mean = expect_under_null(|z| bootstrap_weight_1s(&OneSampleStat { z, n: 25 }, &ResamplePlan::Sqrt, 0.3));
    assert!(mean < 0.7);
}

#[test]
fn weights_shrink_to_zero_under_the_alternative() {
    let plan = ResamplePlan::Sqrt;
    let mu = 0.5;
    let weights: Vec<f64> = [1e2, 1e4, 1e6]
        .iter()
        .map(|&n: &f64| {
            bootstrap_weight_1s(
                &OneSampleStat {
                    z: n.sqrt() * mu,
                    n: n as usize,
                },
                &plan,
                0.5,
            )
        })
        .collect();
    assert!(weights.windows(2).all(|w| w[1] < w[0]));
    assert!(weights[2] < 1e-10);
}

#[test]
fn null_weight_median_approaches_one_minus_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let lambda = 0.3;
    let mut spread = Vec::new();
    for n in [100usize, 10_000, 1_000_000] {
        let mut w: Vec<f64> = (0..2001)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                bootstrap_weight_1s(&OneSampleStat { z, n }, &ResamplePlan::Sqrt, lambda)
            })
            .collect();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, median, hi) = (w[500], w[1000], w[1500]);
        assert!((median - 0.7).abs() < 0.05);
        spread.push(hi - lo);
    }
    assert!(spread.windows(2).all(|s| s[1] < s[0]));
}

proptest! {
    #[test]
    fn bootstrap_weight_is_decreasing_in_z(z in -30.0f64..30.0, dz in 1e-3f64..5.0, n in 1usize..100_000, lambda in 0.01f64..0.99) {
        let plan = ResamplePlan::Sqrt;
        let a = bootstrap_weight_1s(&OneSampleStat { z, n }, &plan, lambda);
        let b = bootstrap_weight_1s(&OneSampleStat { z: z + dz, n }, &plan, lambda);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
        // Strict wherever the value is not saturated in double precision.
        if a > 1e-300 && a < 1.0 - 1e-15 && b > 1e-300 {
            prop_assert!(b < a);
        }
    }

    #[test]
    fn threshold_weight_is_a_non_increasing_step(z in -20.0f64..20.0, dz in 0.0f64..5.0, n in 1usize..10_000, lambda in 0.01f64..0.99) {
        let plan = ThresholdPlan::QuarterPower;
        let a = threshold_weight(&OneSampleStat { z, n }, &plan, lambda);
        let b = threshold_weight(&OneSampleStat { z: z + dz, n }, &plan, lambda);
        prop_assert!(b <= a);
        prop_assert!(a == 0.0 || a == 1.0 - lambda);
    }

    #[test]
    fn two_sample_weight_in_unit_interval(dx in -5.0f64..5.0, n1 in 1usize..5000, n2 in 1usize..5000, lambda in 0.01f64..0.99) {
        let stat = TwoSampleStat { mean_x: dx, mean_y: 0.0, n1, n2 };
        let w = bootstrap_weight_2s(&stat, &ResamplePlan::Sqrt, lambda);
        prop_assert!((0.0..=1.0).contains(&w));
    }
}
