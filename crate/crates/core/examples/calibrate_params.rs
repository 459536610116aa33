//! Recover the depth-equation constants from synthetic samples, with and
//! without gross outliers.

use nearfar::calibration::{fit_linear, fit_robust, residual_report, CalibrationSample};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_chacha::ChaCha8Rng;

fn main() -> nearfar::Result<()> {
    let (a, b) = (60.0, 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut samples: Vec<CalibrationSample> = (0..10_000)
        .map(|_| {
            let z = rng.random_range(0.012..0.020);
            let lap: f64 = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            // drho chosen so the sample satisfies Z (A lap + B drho) = lap
            let drho = (lap / z - a * lap) / b;
            CalibrationSample::new(lap, drho, z)
        })
        .collect();

    let exact = fit_linear(&samples)?;
    println!("exact data:    A = {:.9}, B = {:.9}, condition {:.2}", exact.a_param, exact.b_param, exact.condition);

    // 0.5% depth-label noise everywhere, and every tenth label stretched
    // so its residual grows a hundredfold
    for (i, s) in samples.iter_mut().enumerate() {
        let g: f64 = StandardNormal.sample(&mut rng);
        let e = 5e-3 * g;
        s.z_true *= 1.0 + if i % 10 == 0 { 100.0 * e.abs() } else { e };
    }
    let ls = fit_linear(&samples)?;
    let robust = fit_robust(&samples, None, 50)?;
    println!("10% outliers:  least squares A = {:.4}, B = {:.4}", ls.a_param, ls.b_param);
    println!("               Huber IRLS    A = {:.4}, B = {:.4}", robust.a_param, robust.b_param);

    let report = residual_report(&samples, &robust.params());
    for (p, q) in &report.quantiles {
        println!("  depth residual quantile {p:.2}: {:+.3e} m", q);
    }
    Ok(())
}
