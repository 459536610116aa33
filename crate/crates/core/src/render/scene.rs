//! Fronto-parallel planar targets and the JSON scene description.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Radiance pattern of a target.
#[derive(Debug, Clone, PartialEq)]
pub enum Texture {
    /// Ideal point source carrying `radiance` in total.
    Point { radiance: f64 },
    /// Sampled radiance, row 0 at the top (maximum object y).
    Raster(Raster),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Opacity {
    #[default]
    Opaque,
    /// Coverage `alpha` in (0, 1].
    SemiTransparent(f64),
}

impl Opacity {
    pub fn alpha(self) -> f64 {
        match self {
            Opacity::Opaque => 1.0,
            Opacity::SemiTransparent(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarTarget {
    pub texture: Texture,
    /// Axial distance from the first layer, metres.
    pub depth: f64,
    /// Texel spacing at the object, metres.
    pub physical_pitch: f64,
    /// Lateral position of the texture center, metres.
    pub center: (f64, f64),
    pub opacity: Opacity,
}

impl PlanarTarget {
    pub fn point(depth: f64, radiance: f64) -> Self {
        Self {
            texture: Texture::Point { radiance },
            depth,
            physical_pitch: 1e-6,
            center: (0.0, 0.0),
            opacity: Opacity::Opaque,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.depth > 0.0) || !self.depth.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "target depth must be positive, got {}",
                self.depth
            )));
        }
        if !(self.physical_pitch > 0.0) || !self.physical_pitch.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "physical_pitch must be positive, got {}",
                self.physical_pitch
            )));
        }
        let a = self.opacity.alpha();
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1], got {a}")));
        }
        if !self.center.0.is_finite() || !self.center.1.is_finite() {
            return Err(Error::InvalidConfig("target center must be finite".into()));
        }
        Ok(())
    }
}

/// Texture as written in a scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TextureSpec {
    Point {
        #[serde(default = "one")]
        radiance: f64,
    },
    Checker {
        width: usize,
        height: usize,
        /// Square size in texels.
        period: usize,
        #[serde(default)]
        low: f64,
        #[serde(default = "one")]
        high: f64,
    },
    /// Groups of three bars whose period halves from group to group,
    /// alternating vertical and horizontal orientation.
    UsafLikeBars {
        width: usize,
        height: usize,
        #[serde(default = "default_groups")]
        groups: usize,
    },
    /// PGM or PFM file, path relative to the scene file.
    File { path: String },
}

fn one() -> f64 {
    1.0
}

fn default_groups() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub texture: TextureSpec,
    pub depth: f64,
    pub physical_pitch: f64,
    #[serde(default)]
    pub center: (f64, f64),
    #[serde(default)]
    pub opacity: Opacity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub targets: Vec<TargetSpec>,
}

pub fn checker(width: usize, height: usize, period: usize, low: f64, high: f64) -> Raster {
    let p = period.max(1);
    Raster::from_fn(width, height, |x, y| {
        if (x / p + y / p).is_multiple_of(2) {
            high
        } else {
            low
        }
    })
}

pub fn usaf_like_bars(width: usize, height: usize, groups: usize) -> Raster {
    let mut r = Raster::zeros(width, height);
    let groups = groups.max(1);
    let cell = width / groups;
    for g in 0..groups {
        let period = ((cell / 6) >> g.min(20)).max(2);
        let x0 = g * cell;
        for y in 0..height {
            for x in x0..(x0 + cell).min(width) {
                let (along, across) = if g % 2 == 0 {
                    (x - x0, y)
                } else {
                    (y, x - x0)
                };
                let bar = along / (period / 2).max(1);
                let inside = bar < 5 && bar.is_multiple_of(2) && across < height.min(cell) * 5 / 6;
                if inside {
                    r.set(x, y, 1.0);
                }
            }
        }
    }
    r
}

impl TextureSpec {
    pub fn build(&self, base_dir: &Path) -> Result<Texture> {
        Ok(match self {
            TextureSpec::Point { radiance } => Texture::Point {
                radiance: *radiance,
            },
            TextureSpec::Checker {
                width,
                height,
                period,
                low,
                high,
            } => Texture::Raster(checker(*width, *height, *period, *low, *high)),
            TextureSpec::UsafLikeBars {
                width,
                height,
                groups,
            } => Texture::Raster(usaf_like_bars(*width, *height, *groups)),
            TextureSpec::File { path } => {
                let p = base_dir.join(path);
                let is_pfm = p
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("pfm"));
                let raster = if is_pfm {
                    crate::pnm::read_pfm(&p)?
                } else {
                    let g = crate::pnm::read_pgm(&p)?;
                    Raster::from_vec(
                        g.width,
                        g.height,
                        g.pixels.iter().map(|&v| v as f64).collect(),
                    )?
                };
                Texture::Raster(raster)
            }
        })
    }
}

impl SceneSpec {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json(context, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Materialize textures; file references resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Vec<PlanarTarget>> {
        self.targets
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let target = PlanarTarget {
                    texture: t.texture.build(base_dir)?,
                    depth: t.depth,
                    physical_pitch: t.physical_pitch,
                    center: t.center,
                    opacity: t.opacity,
                };
                target.validate().map_err(|e| match e {
                    Error::InvalidConfig(m) => Error::InvalidConfig(format!("targets[{i}]: {m}")),
                    other => other,
                })?;
                Ok(target)
            })
            .collect()
    }

    /// Semi-transparent slide 14 mm away over a ruler-like bar chart at
    /// 400 mm.
    pub fn near_far_demo() -> Self {
        Self {
            targets: vec![
                TargetSpec {
                    texture: TextureSpec::UsafLikeBars {
                        width: 256,
                        height: 128,
                        groups: 4,
                    },
                    depth: 0.40,
                    physical_pitch: 1.2e-3,
                    center: (0.0, 0.0),
                    opacity: Opacity::Opaque,
                },
                TargetSpec {
                    texture: TextureSpec::Checker {
                        width: 96,
                        height: 96,
                        period: 12,
                        low: 0.2,
                        high: 1.0,
                    },
                    depth: 0.014,
                    physical_pitch: 2e-5,
                    center: (0.0, 0.0),
                    opacity: Opacity::SemiTransparent(0.6),
                },
            ],
        }
    }
}
