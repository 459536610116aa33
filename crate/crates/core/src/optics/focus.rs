//! Per-channel system matrices and the quantities derived from them:
//! in-focus object distance, geometric blur and chief-ray placement.

use super::config::{ChannelSpec, OpticalSystemConfig};
use super::matrix::RayTransferMatrix;
use crate::error::{Error, Result};

/// Below this |S.a| the system is treated as afocal.
pub const AFOCAL_EPS: f64 = 1e-9;

fn gap(d: f64) -> RayTransferMatrix {
    RayTransferMatrix {
        b: d,
        ..RayTransferMatrix::IDENTITY
    }
}

/// The part shared by all channels: `P(s2) L(rho_L) P(s1)`.
pub fn shared_matrix(cfg: &OpticalSystemConfig) -> RayTransferMatrix {
    gap(cfg.s2) * RayTransferMatrix::thin_element(cfg.rho_l, 0.0) * gap(cfg.s1)
}

/// `S = P(s2) L(rho_L) P(s1) E(rho_ch, delta_ch)`, first layer to sensor.
pub fn channel_system_matrix(cfg: &OpticalSystemConfig, ch: &ChannelSpec) -> RayTransferMatrix {
    shared_matrix(cfg) * RayTransferMatrix::thin_element(ch.power, ch.deflection)
}

/// Object distance `Z_f = -S.b / S.a` at which `S P(Z)` has a vanishing
/// b-entry.
pub fn focal_object_distance(s: &RayTransferMatrix) -> Result<f64> {
    if !(s.a.abs() > AFOCAL_EPS) {
        return Err(Error::NoFiniteConjugate(format!(
            "afocal system, |a| = {:e}",
            s.a.abs()
        )));
    }
    let z = -s.b / s.a;
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::NoFiniteConjugate(format!(
            "degenerate conjugate Z_f = {z:e} m is not positive"
        )));
    }
    Ok(z)
}

/// Imaging-condition residual `S.a Z + S.b` (metres) for an object at `z`.
pub fn imaging_residual(s: &RayTransferMatrix, z: f64) -> f64 {
    s.a * z + s.b
}

/// Limiting aperture extent per axis, metres.
pub fn limiting_apertures(cfg: &OpticalSystemConfig) -> (f64, f64) {
    (
        cfg.panel_width.min(cfg.pinhole_diameter),
        cfg.panel_height.min(cfg.pinhole_diameter),
    )
}

fn check_depth(z: f64) -> Result<()> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "object distance must be positive and finite, got {z}"
        )));
    }
    Ok(())
}

/// Geometric blur radius `(r_x, r_y)` in metres on the sensor for a point at
/// distance `z`.
pub fn blur_radius(cfg: &OpticalSystemConfig, ch: &ChannelSpec, z: f64) -> Result<(f64, f64)> {
    check_depth(z)?;
    let s = channel_system_matrix(cfg, ch);
    let spread = imaging_residual(&s, z).abs() / z;
    let (ax, ay) = limiting_apertures(cfg);
    Ok((spread * ax / 2.0, spread * ay / 2.0))
}

/// Chief-ray magnification `-S.b / Z` at object distance `z`. Equals `S.a`
/// when `z` is the channel's focal distance.
pub fn magnification(cfg: &OpticalSystemConfig, ch: &ChannelSpec, z: f64) -> Result<f64> {
    check_depth(z)?;
    Ok(-channel_system_matrix(cfg, ch).b / z)
}

/// Sensor position (x, y), metres, of the chief ray from object point
/// `(x, y)` at distance `z` through the channel's panel center.
pub fn chief_ray_position(
    cfg: &OpticalSystemConfig,
    ch: &ChannelSpec,
    object: (f64, f64),
    z: f64,
) -> Result<(f64, f64)> {
    check_depth(z)?;
    let s = channel_system_matrix(cfg, ch);
    let u_x = (ch.panel_center_x - object.0) / z;
    let (x, _) = s.apply(ch.panel_center_x, u_x);
    let (y, _) = s.apply(0.0, -object.1 / z);
    // the y section carries no deflection
    Ok((x, y - s.height_offset))
}
