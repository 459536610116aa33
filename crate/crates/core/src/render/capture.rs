use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::draw::render_subimage;
use super::geometry::{capture_layout, Window};
use super::noise::apply_noise;
use super::scene::PlanarTarget;
use super::sensor::SensorSpec;
use crate::error::{Error, Result};
use crate::optics::OpticalSystemConfig;
use crate::pnm::{read_pgm, write_pgm16, Gray16};
use crate::raster::Raster;

/// Fraction of full well the brightest pixel is exposed to.
pub const EXPOSURE_TARGET: f64 = 0.8;

/// Quantized sensor frame and where its three sub-images sit.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCapture {
    pixels: Gray16,
    layout: CaptureLayout,
}

/// JSON sidecar content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureLayout {
    /// Windows of I1, I2, I3, left to right.
    pub windows: [Window; 3],
    pub seed: u64,
    /// Multiplier from scene radiance to full-well fraction.
    pub exposure_gain: f64,
    pub bit_depth: u8,
    /// Digital number of zero signal.
    #[serde(default)]
    pub black_dn: u16,
}

impl RawCapture {
    pub fn new(pixels: Gray16, layout: CaptureLayout) -> Result<Self> {
        if pixels.pixels.len() != pixels.width * pixels.height {
            return Err(Error::InvalidArgument("pixel buffer size mismatch".into()));
        }
        for (i, w) in layout.windows.iter().enumerate() {
            if !w.fits(pixels.width, pixels.height) {
                return Err(Error::InvalidConfig(format!(
                    "window {} {:?} lies outside the {}x{} frame",
                    i + 1,
                    w,
                    pixels.width,
                    pixels.height
                )));
            }
        }
        for i in 0..3 {
            for j in i + 1..3 {
                if layout.windows[i].overlaps(&layout.windows[j]) {
                    return Err(Error::InvalidConfig(format!(
                        "windows {} and {} overlap",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if layout.bit_depth != 8 && layout.bit_depth != 16 {
            return Err(Error::InvalidConfig(format!(
                "bit_depth must be 8 or 16, got {}",
                layout.bit_depth
            )));
        }
        Ok(Self { pixels, layout })
    }

    pub fn pixels(&self) -> &Gray16 {
        &self.pixels
    }

    pub fn layout(&self) -> &CaptureLayout {
        &self.layout
    }

    /// Write `<path>` as 16-bit PGM and `<stem>.layout.json` beside it.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_pgm16(path, &self.pixels)?;
        let side = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.layout)
            .map_err(|e| Error::json("capture layout", e))?;
        std::fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let pixels = read_pgm(path)?;
        let side = sidecar_path(path);
        let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
        let layout: CaptureLayout = serde_json::from_str(&text)
            .map_err(|e| Error::json(side.display().to_string(), e))?;
        Self::new(pixels, layout)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.layout.json"))
}

/// Render all three channels, expose, optionally add noise and quantize.
pub fn render_capture(
    scene: &[PlanarTarget],
    cfg: &OpticalSystemConfig,
    sensor: &SensorSpec,
    noise_on: bool,
    seed: u64,
) -> Result<RawCapture> {
    let geometry = capture_layout(cfg, sensor)?;
    let mut frame = Raster::zeros(sensor.width, sensor.height);
    for (g, ch) in geometry.iter().zip(cfg.channels()) {
        let sub = render_subimage(scene, cfg, &ch, sensor)?;
        let w = g.window;
        for y in 0..w.height {
            for x in 0..w.width {
                frame.set(w.x0 + x, w.y0 + y, sub.get(x, y));
            }
        }
    }
    let peak = frame.max();
    let exposure_gain = if peak > 0.0 { EXPOSURE_TARGET / peak } else { 0.0 };
    let mut exposed = frame.scale(exposure_gain);
    if noise_on {
        exposed = apply_noise(&exposed, sensor.full_well, sensor.read_noise_sigma, seed)?;
    }
    let max_dn = sensor.max_dn();
    let black = sensor.black_dn();
    let pixels = Gray16 {
        width: sensor.width,
        height: sensor.height,
        pixels: exposed
            .data()
            .iter()
            .map(|&v| (v * max_dn + black as f64).clamp(0.0, max_dn).round() as u16)
            .collect(),
    };
    RawCapture::new(
        pixels,
        CaptureLayout {
            windows: geometry.map(|g| g.window),
            seed,
            exposure_gain,
            bit_depth: sensor.bit_depth,
            black_dn: black,
        },
    )
}

/// Crop the three windows as digital numbers above black level, in floating
/// point, left to right I1, I2, I3.
pub fn extract_subimages(cap: &RawCapture) -> Result<[Raster; 3]> {
    let g = &cap.pixels;
    let full = Raster::from_vec(
        g.width,
        g.height,
        g.pixels
            .iter()
            .map(|&p| p as f64 - cap.layout.black_dn as f64)
            .collect(),
    )?;
    let mut wins = cap.layout.windows;
    wins.sort_by_key(|w| w.x0);
    let crop = |w: &Window| full.crop(w.x0, w.y0, w.width, w.height);
    Ok([crop(&wins[0])?, crop(&wins[1])?, crop(&wins[2])?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged() -> RawCapture {
        let windows = [
            Window { x0: 0, y0: 0, width: 4, height: 4 },
            Window { x0: 4, y0: 0, width: 4, height: 4 },
            Window { x0: 8, y0: 0, width: 4, height: 4 },
        ];
        let mut px = vec![0u16; 12 * 4];
        for y in 0..4 {
            for x in 0..12 {
                px[y * 12 + x] = 10 * (x as u16 / 4 + 1);
            }
        }
        RawCapture::new(
            Gray16 { width: 12, height: 4, pixels: px },
            CaptureLayout { windows, seed: 0, exposure_gain: 1.0, bit_depth: 16, black_dn: 0 },
        )
        .unwrap()
    }

    #[test]
    fn extracts_tagged_windows() {
        let [a, b, c] = extract_subimages(&tagged()).unwrap();
        assert_eq!((a.mean(), b.mean(), c.mean()), (10.0, 20.0, 30.0));
    }

    #[test]
    fn overlapping_windows_rejected() {
        let cap = tagged();
        let mut layout = cap.layout().clone();
        layout.windows[1].x0 = 2;
        assert!(RawCapture::new(cap.pixels().clone(), layout).is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cap.pgm");
        let cap = tagged();
        cap.write(&p).unwrap();
        assert!(dir.path().join("cap.layout.json").exists());
        assert_eq!(RawCapture::read(&p).unwrap(), cap);
    }
}
