use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default limit on `s1 + s2`, metres.
pub const DEFAULT_TRACK_BUDGET: f64 = 0.015;
/// Design wavelength of the LED illumination, metres.
pub const DEFAULT_WAVELENGTH: f64 = 625e-9;
/// Side-panel deflection toward the axis, degrees.
pub const DEFAULT_DEFLECTION_DEG: f64 = 20.0;

/// Geometric and optical parameters of the three-channel system, SI units.
///
/// Serializes to JSON with exactly these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalSystemConfig {
    /// Power of the left metasurface panel (channel 1), m⁻¹.
    pub rho_1: f64,
    /// Power of the right metasurface panel (channel 3), m⁻¹.
    pub rho_3: f64,
    /// Power of the shared refractive lens, m⁻¹.
    #[serde(rename = "rho_L")]
    pub rho_l: f64,
    /// First layer to lens, m.
    pub s1: f64,
    /// Lens to sensor, m.
    pub s2: f64,
    pub lambda: f64,
    /// Deflection of the side panels toward the axis, radians.
    pub theta: f64,
    pub panel_width: f64,
    pub panel_height: f64,
    /// Center-to-center separation of adjacent panels, m.
    pub panel_pitch: f64,
    pub pinhole_diameter: f64,
    /// Gaussian sigma per unit geometric blur radius.
    pub kappa: f64,
}

impl OpticalSystemConfig {
    /// Panel geometry of the prototype (0.5 x 2 mm apertures separated by
    /// 1 mm, 1 mm pinhole, 20° deflection at 625 nm) with the given powers
    /// and spacings.
    pub fn with_layout(rho_1: f64, rho_3: f64, rho_l: f64, s1: f64, s2: f64) -> Self {
        Self {
            rho_1,
            rho_3,
            rho_l,
            s1,
            s2,
            lambda: DEFAULT_WAVELENGTH,
            theta: DEFAULT_DEFLECTION_DEG.to_radians(),
            panel_width: 0.5e-3,
            panel_height: 2.0e-3,
            panel_pitch: 1.5e-3,
            pinhole_diameter: 1.0e-3,
            kappa: 0.5,
        }
    }

    pub fn track_length(&self) -> f64 {
        self.s1 + self.s2
    }

    fn all_fields(&self) -> [(&'static str, f64); 12] {
        [
            ("rho_1", self.rho_1),
            ("rho_3", self.rho_3),
            ("rho_L", self.rho_l),
            ("s1", self.s1),
            ("s2", self.s2),
            ("lambda", self.lambda),
            ("theta", self.theta),
            ("panel_width", self.panel_width),
            ("panel_height", self.panel_height),
            ("panel_pitch", self.panel_pitch),
            ("pinhole_diameter", self.pinhole_diameter),
            ("kappa", self.kappa),
        ]
    }

    /// Check the physical invariants against a track-length budget.
    pub fn validate(&self, track_budget: f64) -> Result<()> {
        for (name, v) in self.all_fields() {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite, got {v}")));
            }
        }
        let positive = [
            ("s1", self.s1),
            ("s2", self.s2),
            ("lambda", self.lambda),
            ("panel_width", self.panel_width),
            ("panel_height", self.panel_height),
            ("pinhole_diameter", self.pinhole_diameter),
            ("kappa", self.kappa),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.panel_pitch < self.panel_width {
            return Err(Error::InvalidConfig(format!(
                "panel_pitch {} is smaller than panel_width {}: panels overlap",
                self.panel_pitch, self.panel_width
            )));
        }
        if self.track_length() > track_budget * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "track length s1+s2 = {} m exceeds budget {} m",
                self.track_length(),
                track_budget
            )));
        }
        Ok(())
    }

    pub fn channels(&self) -> [ChannelSpec; 3] {
        [self.channel(1), self.channel(2), self.channel(3)]
    }

    /// Channel 1 is the left panel (negative x), channel 3 the right one.
    /// Side deflections point toward the axis.
    pub fn channel(&self, index: u8) -> ChannelSpec {
        match index {
            1 => ChannelSpec {
                index: 1,
                power: self.rho_1,
                deflection: self.theta,
                panel_center_x: -self.panel_pitch,
            },
            2 => ChannelSpec {
                index: 2,
                power: 0.0,
                deflection: 0.0,
                panel_center_x: 0.0,
            },
            3 => ChannelSpec {
                index: 3,
                power: self.rho_3,
                deflection: -self.theta,
                panel_center_x: self.panel_pitch,
            },
            other => panic!("channel index must be 1, 2 or 3, got {other}"),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate(f64::INFINITY)?;
        serde_json::to_string_pretty(self).map_err(|e| Error::json("optical config", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::json("optical config", e))?;
        cfg.validate(f64::INFINITY)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// One of the three optical channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    /// 1, 2 or 3.
    pub index: u8,
    /// Panel power, m⁻¹. Zero for the central window.
    pub power: f64,
    /// Signed angular kick, radians.
    pub deflection: f64,
    /// Lateral offset of the panel center, m.
    pub panel_center_x: f64,
}
