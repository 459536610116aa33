use nearfar::calibration::{fit_linear, fit_robust, residual_report, REPORT_QUANTILES};
use nearfar::dfdd::DfddParams;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{contaminate, exact_samples};

fn rel(x: f64, y: f64) -> f64 {
    ((x - y) / y).abs()
}

/// Samples lying exactly on the depth equation, as a noise-free capture
/// would give them.
#[test]
fn ten_thousand_exact_samples_recovered() {
    let (a, b) = (61.3, -4.2);
    let s = exact_samples(a, b, 10_000, 1);
    for fit in [fit_linear(&s).unwrap(), fit_robust(&s, None, 50).unwrap()] {
        assert!(rel(fit.a_param, a) < 1e-9 && rel(fit.b_param, b) < 1e-9, "{fit:?}");
    }
}

#[test]
fn robust_fit_survives_gross_outliers() {
    let (a, b) = (50.0, 200.0);
    let mut s = exact_samples(a, b, 10_000, 2);
    contaminate(&mut s, 5e-3, 0.1, 3);
    let ls = fit_linear(&s).unwrap();
    let robust = fit_robust(&s, None, 50).unwrap();
    assert!(rel(robust.a_param, a) < 0.01 && rel(robust.b_param, b) < 0.01, "{robust:?}");
    assert!(rel(ls.a_param, a) > 0.05 || rel(ls.b_param, b) > 0.05, "{ls:?}");
}

#[test]
fn outlier_free_robust_matches_linear() {
    let mut s = exact_samples(40.0, 10.0, 2000, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for x in s.iter_mut() {
        x.z_true *= 1.0 + 1e-3 * (rng.random::<f64>() - 0.5);
    }
    let ls = fit_linear(&s).unwrap();
    let big = fit_robust(&s, Some(1e6), 50).unwrap();
    assert!(rel(big.a_param, ls.a_param) < 1e-9 && rel(big.b_param, ls.b_param) < 1e-9);
}

#[test]
fn report_quantiles_match_sorting() {
    let s = exact_samples(40.0, 10.0, 257, 6);
    let p = DfddParams { a_param: 41.0, b_param: 9.5 };
    let rep = residual_report(&s, &p);
    assert_eq!(rep.rows.len(), s.len());
    let mut sorted: Vec<f64> = rep.rows.iter().map(|r| r.depth_residual).collect();
    sorted.sort_by(f64::total_cmp);
    for ((p, q), want_p) in rep.quantiles.iter().zip(REPORT_QUANTILES) {
        assert_eq!(*p, want_p);
        let pos = want_p * (sorted.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        let want = sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]);
        assert!((q - want).abs() <= 1e-15 * want.abs().max(1e-12), "{q} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fit_is_a_minimum(seed in 0u64..1000) {
        let mut s = exact_samples(50.0, 20.0, 200, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        for x in s.iter_mut() {
            x.z_true *= 1.0 + 0.02 * (rng.random::<f64>() - 0.5);
        }
        let fit = fit_linear(&s).unwrap();
        let obj = |a: f64, b: f64| -> f64 {
            let p = DfddParams { a_param: a, b_param: b };
            s.iter().map(|x| x.weight * x.residual(&p).powi(2)).sum()
        };
        let best = obj(fit.a_param, fit.b_param);
        let eps = 1e-6;
        for (da, db) in [(eps, 0.0), (-eps, 0.0), (0.0, eps), (0.0, -eps), (eps, eps), (-eps, -eps), (eps, -eps), (-eps, eps)] {
            prop_assert!(obj(fit.a_param + da, fit.b_param + db) >= best * (1.0 - 1e-12));
        }
    }

    #[test]
    fn order_does_not_matter(seed in 0u64..1000) {
        let mut s = exact_samples(50.0, 20.0, 300, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for x in s.iter_mut() {
            x.z_true *= 1.0 + 0.05 * (rng.random::<f64>() - 0.5);
        }
        let a = fit_linear(&s).unwrap();
        s.shuffle(&mut rng);
        let b = fit_linear(&s).unwrap();
        prop_assert!(rel(b.a_param, a.a_param) < 1e-12 && rel(b.b_param, a.b_param) < 1e-12);
    }
}
