use serde::{Deserialize, Serialize};

use super::sensor::SensorSpec;
use crate::error::{Error, Result};
use crate::optics::{channel_system_matrix, shared_matrix, ChannelSpec, OpticalSystemConfig};

/// Pixel rectangle `[x0, x0+width) x [y0, y0+height)` on the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Window {
    pub fn overlaps(&self, other: &Window) -> bool {
        self.x0 < other.x0 + other.width
            && other.x0 < self.x0 + self.width
            && self.y0 < other.y0 + other.height
            && other.y0 < self.y0 + self.height
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.width > 0 && self.height > 0 && self.x0 + self.width <= width && self.y0 + self.height <= height
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubimageGeometry {
    /// Continuous pixel position (column, row) of an in-focus on-axis point.
    pub center_px: (f64, f64),
    /// Lateral magnification of an in-focus object (`S.a`).
    pub magnification: f64,
    pub window: Window,
}

/// Geometry of all three sub-images.
///
/// Each center is where the chief ray through the panel center lands for
/// an in-focus on-axis point, which is `M.b * deflection` with `M` the
/// shared lens section. Each window is a square strip whose side is the
/// smaller of the closest center spacing and the sensor height, so
/// neighbouring windows abut without overlapping.
pub fn capture_layout(
    cfg: &OpticalSystemConfig,
    sensor: &SensorSpec,
) -> Result<[SubimageGeometry; 3]> {
    sensor.validate()?;
    let m = shared_matrix(cfg);
    let channels = cfg.channels();
    let centers = channels.map(|ch| sensor.to_pixel(m.b * ch.deflection, 0.0));
    let mut spacing = f64::INFINITY;
    for i in 0..3 {
        for j in i + 1..3 {
            let d = (centers[i].0 - centers[j].0).abs();
            spacing = spacing.min(d);
        }
    }
    let side = spacing.min(sensor.height as f64).floor();
    if !(side >= 1.0) {
        return Err(Error::SensorTooSmall(format!(
            "sub-image centers are only {spacing:.3} px apart"
        )));
    }
    let side = side as usize;
    let mut out = [SubimageGeometry {
        center_px: (0.0, 0.0),
        magnification: 0.0,
        window: Window {
            x0: 0,
            y0: 0,
            width: 0,
            height: 0,
        },
    }; 3];
    for (i, ch) in channels.iter().enumerate() {
        let (cx, cy) = centers[i];
        let x0 = cx.round() as i64 - (side / 2) as i64;
        let y0 = cy.round() as i64 - (side / 2) as i64;
        if x0 < 0
            || y0 < 0
            || x0 as usize + side > sensor.width
            || y0 as usize + side > sensor.height
        {
            return Err(Error::SensorTooSmall(format!(
                "channel {} window of {side} px at ({x0}, {y0}) exceeds the {}x{} sensor",
                ch.index, sensor.width, sensor.height
            )));
        }
        out[i] = SubimageGeometry {
            center_px: (cx, cy),
            magnification: channel_system_matrix(cfg, ch).a,
            window: Window {
                x0: x0 as usize,
                y0: y0 as usize,
                width: side,
                height: side,
            },
        };
    }
    Ok(out)
}

pub fn subimage_geometry(
    cfg: &OpticalSystemConfig,
    ch: &ChannelSpec,
    sensor: &SensorSpec,
) -> Result<SubimageGeometry> {
    let all = capture_layout(cfg, sensor)?;
    Ok(all[(ch.index - 1) as usize])
}
