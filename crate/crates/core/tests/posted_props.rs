mod common;

use btl_core::dist::Dist;
use btl_core::posted::{
    decomposition_rhs, median_pricing, optimize_prices, profit, quantile_pricing, single_sample, MonteCarloConfig,
    OptimizerConfig, PostedError, PricePair,
};
use btl_core::quad::{first_best, gft_posted, QuadConfig};
use proptest::prelude::*;

fn brute_force(f: &Dist, g: &Dist, n: usize) -> f64 {
    let lo = g.support_lo().min(f.support_lo());
    let hi = f.support_hi().max(g.support_hi());
    let xs: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let mut best: f64 = 0.0;
    for (i, &q) in xs.iter().enumerate() {
        for &p in &xs[i..] {
            best = best.max(profit(f, g, PricePair::new(p, q).unwrap()));
        }
    }
    best
}

#[test]
fn optimizer_beats_a_fine_grid_on_truncated_exponentials() {
    let cfg = QuadConfig::default();
    for (rate, hi) in [(1.0, 5.0), (2.0, 3.0), (0.5, 4.0)] {
        let e = Dist::truncated_exp(rate, hi).unwrap();
        let r = optimize_prices(&e, &e, &OptimizerConfig::default(), &cfg).unwrap();
        let grid = brute_force(&e, &e, 4096);
        assert!(r.profit >= grid - 1e-6, "rate {rate}: {} vs {grid}", r.profit);
    }
}

#[test]
fn optimizer_finds_the_uniform_optimum() {
    let u = Dist::uniform(0.0, 1.0).unwrap();
    let r = optimize_prices(&u, &u, &OptimizerConfig { grid_n: 64, refine_iters: 50 }, &QuadConfig::default()).unwrap();
    assert!((r.prices.p() - 2.0 / 3.0).abs() < 1e-5 && (r.prices.q() - 1.0 / 3.0).abs() < 1e-5);
    assert!((r.profit - 1.0 / 27.0).abs() < 1e-12);
}

#[test]
fn optimum_dominates_the_tercile_witness_pair() {
    let cfg = QuadConfig::default();
    let mut r = common::rng(21);
    for _ in 0..8 {
        let d = common::regular_dist(&mut r);
        let opt = optimize_prices(&d, &d, &OptimizerConfig { grid_n: 256, refine_iters: 40 }, &cfg).unwrap();
        let pp = PricePair::new(d.quantile(2.0 / 3.0).unwrap(), d.quantile(1.0 / 3.0).unwrap()).unwrap();
        assert!(opt.profit >= profit(&d, &d, pp) - 1e-12);
    }
    let u = Dist::uniform(0.0, 1.0).unwrap();
    let pp = PricePair::new(0.75, 0.25).unwrap();
    assert!((profit(&u, &u, pp) - 1.0 / 32.0).abs() < 1e-15);
    assert!((gft_posted(&u, &u, pp) - 3.0 / 64.0).abs() < 1e-15);
}

#[test]
fn median_pricing_needs_ordered_medians() {
    let cfg = QuadConfig::default();
    let f = Dist::uniform(0.0, 1.0).unwrap();
    let g = Dist::uniform(0.6, 1.0).unwrap();
    match median_pricing(&f, &g, &cfg) {
        Err(PostedError::MedianOrderViolated { result, .. }) => assert!(result.prices.p() >= result.prices.q()),
        other => panic!("expected an order violation, got {other:?}"),
    }
    let r = median_pricing(&f, &f, &cfg).unwrap();
    assert!(r.gft >= r.fb / 2.0 * 0.5 - 1e-12);
}

#[test]
fn quantile_pricing_rejects_crossed_quantiles() {
    let cfg = QuadConfig::default();
    let u = Dist::uniform(0.0, 1.0).unwrap();
    assert!(matches!(quantile_pricing(&u, &u, 0.5, 0.0, &cfg), Err(PostedError::InvalidQuantiles { .. })));
    let g = Dist::uniform(0.5, 1.0).unwrap();
    assert!(matches!(quantile_pricing(&u, &g, 0.2, 0.8, &cfg), Err(PostedError::QuantileOrderViolated { .. })));
}

#[test]
fn single_sample_is_stable_across_seeds() {
    let cfg = QuadConfig::default();
    let u = Dist::uniform(0.0, 1.0).unwrap();
    let means: Vec<f64> = (0..4)
        .map(|seed| {
            let mc = MonteCarloConfig { samples: 200_000, seed, batches: 20 };
            single_sample(&u, &u, &mc, &cfg).unwrap().mean_gft
        })
        .collect();
    let mc = MonteCarloConfig { samples: 200_000, seed: 0, batches: 20 };
    let rep = single_sample(&u, &u, &mc, &cfg).unwrap();
    assert_eq!(rep.mean_gft, means[0]);
    for m in &means {
        assert!((m - means[0]).abs() < 8.0 * rep.std_err, "{means:?}");
    }
    assert!(rep.passes && rep.symmetric);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quantile_pricing_meets_its_guarantee(seed in 0u64..u64::MAX, alpha in 0.05f64..0.95, beta in 0.05f64..0.95) {
        let mut r = common::rng(seed);
        let (f, g) = (common::any_dist(&mut r, false), common::any_dist(&mut r, false));
        let cfg = QuadConfig::default();
        match quantile_pricing(&f, &g, alpha, beta, &cfg) {
            Ok(res) => {
                let fb = first_best(&f, &g, &cfg).unwrap();
                prop_assert!(res.gft >= beta * (1.0 - alpha) * fb - 1e-9);
                prop_assert!(res.gft >= res.decomposition_rhs - 1e-9);
                prop_assert!(res.gft >= res.profit - 1e-12);
            }
            Err(PostedError::QuantileOrderViolated { p, q }) => prop_assert!(p < q),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn optimizer_never_loses_to_its_own_grid(seed in 0u64..u64::MAX) {
        let mut r = common::rng(seed);
        let (f, g) = (common::any_dist(&mut r, false), common::any_dist(&mut r, false));
        let cfg = QuadConfig::default();
        let res = match optimize_prices(&f, &g, &OptimizerConfig { grid_n: 128, refine_iters: 20 }, &cfg) {
            Ok(res) => res,
            Err(PostedError::DegenerateInstance { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(res.profit >= brute_force(&f, &g, 64) - 1e-12 * (1.0 + res.profit));
        let rhs = decomposition_rhs(&f, &g, res.prices, &cfg).unwrap();
        prop_assert!((rhs - res.decomposition_rhs).abs() < 1e-12);
    }
}
