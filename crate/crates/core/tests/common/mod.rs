//! Oracles and generators shared by the integration tests and the
//! acceptance suite.
#![allow(dead_code)]

use nearfar::calibration::CalibrationSample;
use nearfar::optics::{blur_radius, ChannelSpec, OpticalSystemConfig, RayTransferMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Sensor height of one paraxial ray leaving the on-axis object point at
/// distance `z` and crossing the first layer at height `u`, stepped element
/// by element without matrices.
pub fn trace(cfg: &OpticalSystemConfig, ch: &ChannelSpec, z: f64, u: f64, deflect: bool) -> f64 {
    let mut h = u;
    let mut t = u / z;
    t -= ch.power * h;
    if deflect {
        t += ch.deflection;
    }
    h += cfg.s1 * t;
    t -= cfg.rho_l * h;
    h += cfg.s2 * t;
    h
}

/// Half the spread of sensor heights over random rays filling an aperture
/// of width `a` centered at `center`.
pub fn mc_radius(
    cfg: &OpticalSystemConfig,
    ch: &ChannelSpec,
    z: f64,
    center: f64,
    a: f64,
    deflect: bool,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..20_000 {
        let u = center + a * (rng.random::<f64>() - 0.5);
        let h = trace(cfg, ch, z, u, deflect);
        lo = lo.min(h);
        hi = hi.max(h);
    }
    0.5 * (hi - lo)
}

pub fn random_config(rng: &mut ChaCha8Rng) -> OpticalSystemConfig {
    let mut cfg = OpticalSystemConfig::with_layout(
        rng.random_range(10.0..120.0),
        rng.random_range(10.0..120.0),
        rng.random_range(100.0..900.0),
        rng.random_range(0.2e-3..6e-3),
        rng.random_range(0.5e-3..8e-3),
    );
    cfg.panel_width = rng.random_range(0.2e-3..1.5e-3);
    cfg.panel_height = rng.random_range(0.5e-3..3e-3);
    cfg.pinhole_diameter = rng.random_range(0.3e-3..2e-3);
    cfg
}

/// Root of `S.a Z + S.b` on `[lo, hi]` by bisection.
pub fn bisect(s: &RayTransferMatrix, mut lo: f64, mut hi: f64) -> f64 {
    let f = |z: f64| s.a * z + s.b;
    assert!(f(lo) * f(hi) <= 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest relative disagreement between `blur_radius` and the ray trace,
/// over both axes of `cases` random configurations.
pub fn worst_blur_trace_error(seed: u64, cases: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let cfg = random_config(&mut rng);
        let ch = cfg.channel(rng.random_range(1..=3));
        let z = rng.random_range(0.008..0.5);
        let (rx, ry) = blur_radius(&cfg, &ch, z).unwrap();
        let ax = cfg.panel_width.min(cfg.pinhole_diameter);
        let ay = cfg.panel_height.min(cfg.pinhole_diameter);
        let mx = mc_radius(&cfg, &ch, z, ch.panel_center_x, ax, true, &mut rng);
        // no deflection along y, and the panel is centered at y = 0
        let my = mc_radius(&cfg, &ch, z, 0.0, ay, false, &mut rng);
        worst = worst.max(((rx - mx) / mx).abs()).max(((ry - my) / my).abs());
    }
    worst
}

/// Samples lying exactly on the depth equation with constants `(a, b)`.
pub fn exact_samples(a: f64, b: f64, n: usize, seed: u64) -> Vec<CalibrationSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z = rng.random_range(0.012..0.020);
            let lap = rng.random_range(0.1..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            CalibrationSample::new(lap, (lap / z - a * lap) / b, z)
        })
        .collect()
}

/// Give every depth label `label_noise` relative noise, then stretch the
/// labels of `fraction` of the samples so their residual grows a
/// hundredfold. Inflating lap or drho instead would add leverage, which
/// Huber weights on the residual cannot reject.
pub fn contaminate(s: &mut [CalibrationSample], label_noise: f64, fraction: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps: Vec<f64> = s
        .iter()
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            label_noise * g
        })
        .collect();
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.shuffle(&mut rng);
    let mut outlier = vec![false; s.len()];
    for &i in &idx[..(fraction * s.len() as f64).round() as usize] {
        outlier[i] = true;
    }
    for (i, x) in s.iter_mut().enumerate() {
        let e = if outlier[i] { 100.0 * eps[i].abs() } else { eps[i] };
        x.z_true *= 1.0 + e;
    }
}
