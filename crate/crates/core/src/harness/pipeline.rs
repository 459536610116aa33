//! Point-source ranging pipeline shared by the commands and examples.

use crate::calibration::CalibrationSample;
use crate::dfdd::{
    align_smoothed, depth_from_defocus, differential_pair, DepthMap, DfddConfig, DfddParams,
    DifferentialPair, Thresholds,
};
use crate::error::Result;
use crate::optics::OpticalSystemConfig;
use crate::render::{extract_subimages, render_capture, PlanarTarget, RawCapture, SensorSpec};

/// Noise-free or noisy capture of an on-axis point source at depth `z`.
pub fn point_capture(
    cfg: &OpticalSystemConfig,
    sensor: &SensorSpec,
    z: f64,
    noise_on: bool,
    seed: u64,
) -> Result<RawCapture> {
    render_capture(&[PlanarTarget::point(z, 1.0)], cfg, sensor, noise_on, seed)
}

/// Differential images of a capture with the gates derived from them.
#[derive(Debug, Clone)]
pub struct Differential {
    pub pair: DifferentialPair,
    /// I1 -> I3 shift, pixels.
    pub shift: (f64, f64),
    pub thresholds: Thresholds,
}

pub fn differential_from_capture(cap: &RawCapture, dcfg: &DfddConfig) -> Result<Differential> {
    let [i1, _, i3] = extract_subimages(cap)?;
    let aligned = align_smoothed(&i1, &i3, dcfg)?;
    let pair = differential_pair(&aligned, dcfg)?;
    let thresholds = Thresholds::relative(&pair, dcfg);
    Ok(Differential {
        pair,
        shift: aligned.shift,
        thresholds,
    })
}

/// Calibration samples from every pixel passing the Laplacian gate.
pub fn calibration_samples(d: &Differential, z_true: f64) -> Vec<CalibrationSample> {
    let p = &d.pair;
    let mut out = Vec::new();
    for y in 0..p.lap.height() {
        for x in 0..p.lap.width() {
            let lap = p.lap.get(x, y);
            if p.valid.get(x, y) && lap.abs() > d.thresholds.eps_lap {
                out.push(CalibrationSample::new(lap, p.drho.get(x, y), z_true));
            }
        }
    }
    out
}

pub fn estimate_depth(d: &Differential, params: &DfddParams) -> DepthMap {
    depth_from_defocus(&d.pair, params, &d.thresholds)
}
