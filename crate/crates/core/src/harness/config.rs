//! Experiment configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dfdd::DfddConfig;
use crate::error::{Error, Result};
use crate::metasurface::{DEFAULT_LEVELS, DEFAULT_PITCH};
use crate::optics::{reference_design, OpticalSystemConfig, DEFAULT_TRACK_BUDGET, REFERENCE_TARGETS};
use crate::render::SensorSpec;

/// Side length of each sub-image window in the reference experiment, px.
pub const REFERENCE_WINDOW_PX: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Off {
    Off,
}

/// Sensor noise: `"off"` or a shot-plus-read model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "NoiseRepr", into = "NoiseRepr")]
pub enum NoiseSpec {
    Off,
    /// `gain` photons per unit of full scale, `read_sigma` photons RMS.
    Model { gain: f64, read_sigma: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NoiseRepr {
    Off(Off),
    Model {
        gain: f64,
        read_sigma: f64,
    },
}

impl From<NoiseRepr> for NoiseSpec {
    fn from(r: NoiseRepr) -> Self {
        match r {
            NoiseRepr::Off(_) => NoiseSpec::Off,
            NoiseRepr::Model { gain, read_sigma } => NoiseSpec::Model { gain, read_sigma },
        }
    }
}

impl From<NoiseSpec> for NoiseRepr {
    fn from(n: NoiseSpec) -> Self {
        match n {
            NoiseSpec::Off => NoiseRepr::Off(Off::Off),
            NoiseSpec::Model { gain, read_sigma } => NoiseRepr::Model { gain, read_sigma },
        }
    }
}

impl NoiseSpec {
    /// Model taken from the sensor's full well and read noise.
    pub fn from_sensor(s: &SensorSpec) -> Self {
        NoiseSpec::Model {
            gain: s.full_well,
            read_sigma: s.read_noise_sigma,
        }
    }

    pub fn is_on(&self) -> bool {
        matches!(self, NoiseSpec::Model { .. })
    }
}

/// Inputs of `design`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    /// Focal distances for channels 1, 2, 3, metres.
    pub targets: [f64; 3],
    pub rho_1: f64,
    pub rho_3: f64,
    pub track_budget: f64,
}

impl Default for DesignSpec {
    fn default() -> Self {
        Self {
            targets: REFERENCE_TARGETS,
            rho_1: 20.0,
            rho_3: 100.0,
            track_budget: DEFAULT_TRACK_BUDGET,
        }
    }
}

/// Inputs of `phase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub levels: usize,
    /// Sample pitch, metres.
    pub pitch: f64,
}

impl Default for PhaseSpec {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS,
            pitch: DEFAULT_PITCH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub optical: OpticalSystemConfig,
    pub sensor: SensorSpec,
    /// True depths of the sweep, metres, strictly increasing.
    pub depths: Vec<f64>,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "point_ranging")]
    pub dfdd: DfddConfig,
    #[serde(default)]
    pub design: DesignSpec,
    #[serde(default)]
    pub phase: PhaseSpec,
}

fn point_ranging() -> DfddConfig {
    DfddConfig::point_ranging(2.0)
}

impl ExperimentConfig {
    /// Reference design, 512 px sub-images, default noise, depths 12 to
    /// 20 mm in 1 mm steps.
    pub fn reference() -> Result<Self> {
        let (optical, _) = reference_design()?;
        let sensor = SensorSpec::matched(&optical, REFERENCE_WINDOW_PX)?;
        Ok(Self {
            noise: NoiseSpec::from_sensor(&sensor),
            optical,
            sensor,
            depths: (0..9).map(|k| (12 + k) as f64 * 1e-3).collect(),
            seed: 0,
            output_dir: PathBuf::from("out"),
            dfdd: point_ranging(),
            design: DesignSpec::default(),
            phase: PhaseSpec::default(),
        })
    }

    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::json(context, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("experiment config", e))
    }

    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        self.dfdd.validate()?;
        self.validate_depths()?;
        if let NoiseSpec::Model { gain, read_sigma } = self.noise {
            if !(gain > 0.0) || !gain.is_finite() || !(read_sigma >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "noise needs gain > 0 and read_sigma >= 0, got {gain}, {read_sigma}"
                )));
            }
        }
        Ok(())
    }

    fn validate_depths(&self) -> Result<()> {
        if let Some(z) = self.depths.iter().find(|z| !(**z > 0.0) || !z.is_finite()) {
            return Err(Error::InvalidConfig(format!("depths must be positive, got {z}")));
        }
        if self.depths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("depths must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Sensor with the noise model folded in: the gain becomes the full
    /// well and `read_sigma` the read noise.
    pub fn effective_sensor(&self) -> SensorSpec {
        match self.noise {
            NoiseSpec::Off => self.sensor.clone(),
            NoiseSpec::Model { gain, read_sigma } => SensorSpec {
                full_well: gain,
                read_noise_sigma: read_sigma,
                ..self.sensor.clone()
            },
        }
    }

    /// Apply `--noise on|off`; `on` keeps a configured model or falls back
    /// to the sensor's.
    pub fn set_noise(&mut self, on: bool) {
        self.noise = match (on, self.noise) {
            (false, _) => NoiseSpec::Off,
            (true, NoiseSpec::Off) => NoiseSpec::from_sensor(&self.sensor),
            (true, model) => model,
        };
    }
}
