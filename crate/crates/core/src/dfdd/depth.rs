//! Closed-form depth `Z = lap / (A lap + B drho)`.

use serde::{Deserialize, Serialize};

use super::differential::DifferentialPair;
use super::DfddConfig;
use crate::error::{Error, Result};
use crate::numeric::quantile;
use crate::raster::{Mask, Raster};

/// Calibrated constants of the depth equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfddParams {
    /// m⁻¹.
    pub a_param: f64,
    /// m⁻¹ per unit of `drho / lap`.
    pub b_param: f64,
}

impl DfddParams {
    pub fn new(a_param: f64, b_param: f64) -> Result<Self> {
        let p = Self { a_param, b_param };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_param > 0.0) || !self.a_param.is_finite() || !self.b_param.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "A must be positive and B finite, got A = {}, B = {}",
                self.a_param, self.b_param
            )));
        }
        Ok(())
    }
}

/// Gating applied per pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub eps_lap: f64,
    pub eps_den: f64,
    pub z_max: f64,
}

impl Thresholds {
    /// `fraction` times the `quantile` of |lap| over valid pixels, for both
    /// the Laplacian and the denominator.
    pub fn relative(d: &DifferentialPair, cfg: &DfddConfig) -> Self {
        let mags: Vec<f64> = d
            .lap
            .data()
            .iter()
            .zip(d.valid.data())
            .filter(|(_, &ok)| ok)
            .map(|(v, _)| v.abs())
            .collect();
        let scale = quantile(&mags, cfg.gate_quantile).unwrap_or(0.0);
        let eps = cfg.gate_fraction * scale;
        Self {
            eps_lap: eps,
            eps_den: eps,
            z_max: cfg.z_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    /// Metres; zero where invalid.
    pub depth: Raster,
    /// |A lap + B drho|; zero where invalid.
    pub confidence: Raster,
    pub valid: Mask,
}

impl DepthMap {
    pub fn n_valid(&self) -> usize {
        self.valid.count()
    }

    /// `(depth, confidence)` of every valid pixel in raster order.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.depth
            .data()
            .iter()
            .zip(self.confidence.data())
            .zip(self.valid.data())
            .filter(|(_, &ok)| ok)
            .map(|((&z, &c), _)| (z, c))
            .collect()
    }
}

pub fn depth_from_defocus(
    d: &DifferentialPair,
    params: &DfddParams,
    th: &Thresholds,
) -> DepthMap {
    let (w, h) = (d.lap.width(), d.lap.height());
    let mut depth = Raster::zeros(w, h);
    let mut confidence = Raster::zeros(w, h);
    let mut valid = Mask::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            if !d.valid.get(x, y) {
                continue;
            }
            let lap = d.lap.get(x, y);
            let den = params.a_param * lap + params.b_param * d.drho.get(x, y);
            if !(lap.abs() > th.eps_lap && den.abs() > th.eps_den) {
                continue;
            }
            let z = lap / den;
            if z > 0.0 && z < th.z_max {
                depth.set(x, y, z);
                confidence.set(x, y, den.abs());
                valid.set(x, y, true);
            }
        }
    }
    DepthMap {
        depth,
        confidence,
        valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(lap: f64, drho: f64) -> DifferentialPair {
        DifferentialPair {
            lap: Raster::filled(3, 3, lap),
            drho: Raster::filled(3, 3, drho),
            valid: Mask::filled(3, 3, true),
        }
    }

    const TH: Thresholds = Thresholds {
        eps_lap: 1e-9,
        eps_den: 1e-9,
        z_max: 0.1,
    };

    #[test]
    fn direct_evaluation() {
        let p = DfddParams::new(50.0, 40.0).unwrap();
        let dm = depth_from_defocus(&pair(2.0, 0.5), &p, &TH);
        assert_eq!(dm.depth.get(1, 1), 2.0 / 120.0);
        assert_eq!(dm.confidence.get(1, 1), 120.0);
        assert_eq!(dm.n_valid(), 9);
    }

    #[test]
    fn zero_drho_gives_inverse_a() {
        let p = DfddParams::new(62.5, -13.0).unwrap();
        let dm = depth_from_defocus(&pair(-0.7, 0.0), &p, &TH);
        assert!(dm.samples().iter().all(|&(z, _)| z == 1.0 / 62.5));
    }

    #[test]
    fn gating() {
        let p = DfddParams::new(50.0, 40.0).unwrap();
        // negative depth
        assert_eq!(depth_from_defocus(&pair(1.0, -2.0), &p, &TH).n_valid(), 0);
        // below eps_lap
        assert_eq!(depth_from_defocus(&pair(1e-12, 0.0), &p, &TH).n_valid(), 0);
        // beyond z_max
        assert_eq!(depth_from_defocus(&pair(1.0, -1.24), &p, &TH).n_valid(), 0);
        assert!(DfddParams::new(0.0, 1.0).is_err());
    }
}
