use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{shared_matrix, OpticalSystemConfig};

/// Pixel grid and noise characteristics of the image sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub width: usize,
    pub height: usize,
    /// Metres.
    pub pixel_pitch: f64,
    /// Photons at saturation.
    pub full_well: f64,
    /// Photons, RMS.
    pub read_noise_sigma: f64,
    pub bit_depth: u8,
    /// Pedestal added before quantization, as a fraction of full scale, so
    /// read noise around zero signal is not clipped.
    #[serde(default = "default_black_level")]
    pub black_level: f64,
}

pub const DEFAULT_BLACK_LEVEL: f64 = 0.002;

fn default_black_level() -> f64 {
    DEFAULT_BLACK_LEVEL
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            width: 1024,
            height: 1024,
            pixel_pitch: 3.45e-6,
            full_well: 12_500.0,
            read_noise_sigma: 3.0,
            bit_depth: 16,
            black_level: DEFAULT_BLACK_LEVEL,
        }
    }
}

impl SensorSpec {
    /// Sensor whose pitch places adjacent sub-image centers `window_px`
    /// pixels apart, with room for three square windows side by side.
    pub fn matched(cfg: &OpticalSystemConfig, window_px: usize) -> Result<Self> {
        let spacing = shared_matrix(cfg).b.abs() * cfg.theta.abs();
        if !(spacing > 0.0) || window_px == 0 {
            return Err(Error::InvalidConfig(
                "sub-images do not separate: zero deflection or image distance".into(),
            ));
        }
        Ok(Self {
            width: 3 * window_px + 64,
            height: window_px,
            pixel_pitch: spacing / window_px as f64,
            ..Self::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig("sensor dimensions must be positive".into()));
        }
        for (name, v) in [
            ("pixel_pitch", self.pixel_pitch),
            ("full_well", self.full_well),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.read_noise_sigma >= 0.0) || !self.read_noise_sigma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "read_noise_sigma must be non-negative, got {}",
                self.read_noise_sigma
            )));
        }
        if !(0.0..0.5).contains(&self.black_level) {
            return Err(Error::InvalidConfig(format!(
                "black_level must lie in [0, 0.5), got {}",
                self.black_level
            )));
        }
        if self.bit_depth != 8 && self.bit_depth != 16 {
            return Err(Error::InvalidConfig(format!(
                "bit_depth must be 8 or 16, got {}",
                self.bit_depth
            )));
        }
        Ok(())
    }

    pub fn max_dn(&self) -> f64 {
        ((1u32 << self.bit_depth) - 1) as f64
    }

    /// Black level in digital numbers.
    pub fn black_dn(&self) -> u16 {
        (self.black_level * self.max_dn()).round() as u16
    }

    /// Continuous pixel coordinates (column, row) of a sensor-plane point.
    /// The optical axis lands on pixel `(width/2, height/2)`; the readout is
    /// rotated by 180 degrees so the inverted image appears upright.
    pub fn to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (self.width / 2) as f64 - x / self.pixel_pitch,
            (self.height / 2) as f64 + y / self.pixel_pitch,
        )
    }

    /// Inverse of [`SensorSpec::to_pixel`].
    pub fn to_sensor(&self, col: f64, row: f64) -> (f64, f64) {
        (
            ((self.width / 2) as f64 - col) * self.pixel_pitch,
            (row - (self.height / 2) as f64) * self.pixel_pitch,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_mapping_round_trips() {
        let s = SensorSpec::default();
        assert_eq!(s.to_pixel(0.0, 0.0), (512.0, 512.0));
        let (c, r) = s.to_pixel(1e-4, -2e-4);
        let (x, y) = s.to_sensor(c, r);
        assert!((x - 1e-4).abs() < 1e-18 && (y + 2e-4).abs() < 1e-18);
        assert!(c < 512.0 && r < 512.0);
    }

    #[test]
    fn validation() {
        assert!(SensorSpec::default().validate().is_ok());
        let s = SensorSpec {
            bit_depth: 12,
            ..SensorSpec::default()
        };
        assert!(s.validate().is_err());
        assert_eq!(SensorSpec::default().max_dn(), 65535.0);
    }
}
