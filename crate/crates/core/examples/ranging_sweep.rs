//! Calibrate on half-step depths, then range point sources at 12..20 mm.
//!
//! `cargo run --release --example ranging_sweep -- [--noise]`

use nearfar::calibration::{fit_robust, DEFAULT_MAX_ITER};
use nearfar::dfdd::{aggregate::metrics_row, DfddConfig};
use nearfar::harness::pipeline::{
    calibration_samples, differential_from_capture, estimate_depth, point_capture,
};
use nearfar::optics::reference_design;
use nearfar::render::SensorSpec;

fn main() -> nearfar::Result<()> {
    let noise = std::env::args().any(|a| a == "--noise");
    let (cfg, _) = reference_design()?;
    let sensor = SensorSpec::matched(&cfg, 512)?;
    let dcfg = DfddConfig::point_ranging(2.0);

    let mut samples = Vec::new();
    for k in 0..8 {
        let z = 0.0125 + k as f64 * 1e-3;
        let cap = point_capture(&cfg, &sensor, z, noise, 1000 + k)?;
        let d = differential_from_capture(&cap, &dcfg)?;
        samples.extend(calibration_samples(&d, z));
    }
    let fit = fit_robust(&samples, None, DEFAULT_MAX_ITER)?;
    println!(
        "A = {:.4}  B = {:.4}  rms = {:.3e} m  n = {}",
        fit.a_param, fit.b_param, fit.rms_residual, fit.n_used
    );

    println!("true_mm  mean_mm  mae_mm  frac5  n_valid  shift");
    for k in 0..9 {
        let z = 0.012 + k as f64 * 1e-3;
        let cap = point_capture(&cfg, &sensor, z, noise, k)?;
        let d = differential_from_capture(&cap, &dcfg)?;
        let dm = estimate_depth(&d, &fit.params());
        let row = metrics_row(&dm.samples(), z);
        println!(
            "{:7.1}  {:7.3}  {:6.3}  {:5.3}  {:7}  ({:.2}, {:.2})",
            row.true_depth_mm,
            row.mean_pred_mm,
            row.mae_mm,
            row.frac_within_5pct,
            row.n_valid,
            d.shift.0,
            d.shift.1
        );
    }
    Ok(())
}
