//! Range a single noisy point-source capture at 16 mm with constants fitted
//! on a stack at other depths.

use nearfar::calibration::fit_robust;
use nearfar::dfdd::{aggregate_depth, DfddConfig};
use nearfar::harness::pipeline::{
    calibration_samples, differential_from_capture, estimate_depth, point_capture,
};
use nearfar::optics::reference_design;
use nearfar::render::SensorSpec;

fn main() -> nearfar::Result<()> {
    let (cfg, _) = reference_design()?;
    let sensor = SensorSpec::matched(&cfg, 512)?;
    let dcfg = DfddConfig::point_ranging(2.0);

    let mut samples = Vec::new();
    for z in [0.0125, 0.0145, 0.0175, 0.0195] {
        let d = differential_from_capture(&point_capture(&cfg, &sensor, z, true, 3)?, &dcfg)?;
        samples.extend(calibration_samples(&d, z));
    }
    let fit = fit_robust(&samples, None, 50)?;
    println!("A = {:.4} m^-1, B = {:.4} m^-1", fit.a_param, fit.b_param);

    let cap = point_capture(&cfg, &sensor, 0.016, true, 4)?;
    let d = differential_from_capture(&cap, &dcfg)?;
    println!("I1 -> I3 shift ({:.3}, {:.3}) px", d.shift.0, d.shift.1);
    let dm = estimate_depth(&d, &fit.params());
    let agg = aggregate_depth(&dm, dcfg.bin_width)?;
    println!("{} valid pixels, weighted median {:.3} mm (true 16 mm)", dm.n_valid(), agg.point_estimate * 1e3);
    for (i, w) in agg.histogram.weights.iter().enumerate() {
        if *w > 0.0 {
            println!("  [{:.2}, {:.2}) mm  {:.3e}", agg.histogram.bin_start(i) * 1e3, agg.histogram.bin_start(i + 1) * 1e3, w);
        }
    }
    Ok(())
}
