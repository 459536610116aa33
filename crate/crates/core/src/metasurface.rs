//! Phase profiles of the side panels: a hyperbolic focusing term plus a
//! linear deflection ramp, wrapped and optionally quantized.

use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Default number of phase levels of the unit-cell library.
pub const DEFAULT_LEVELS: usize = 8;
/// Default sample pitch of the phase map, metres.
pub const DEFAULT_PITCH: f64 = 350e-9;

/// Sampling grid of a panel, centered on the panel origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub width: usize,
    pub height: usize,
    pub pitch: f64,
}

impl PhaseGrid {
    /// Grid covering a `w x h` metre panel at `pitch`, rounded to an odd
    /// sample count so one sample sits on the panel center.
    pub fn covering(w: f64, h: f64, pitch: f64) -> Self {
        let odd = |len: f64| {
            let n = (len / pitch).floor() as usize;
            if n.is_multiple_of(2) {
                n + 1
            } else {
                n
            }
        };
        Self {
            width: odd(w),
            height: odd(h),
            pitch,
        }
    }

    /// Physical coordinate of sample (0, 0).
    pub fn origin(&self) -> (f64, f64) {
        (
            -0.5 * (self.width as f64 - 1.0) * self.pitch,
            -0.5 * (self.height as f64 - 1.0) * self.pitch,
        )
    }
}

/// Wrapped phase samples. Row 0 holds the minimum y.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    pub width: usize,
    pub height: usize,
    pub pitch: f64,
    pub origin: (f64, f64),
    pub values: Vec<f64>,
}

impl PhaseProfile {
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn position(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin.0 + col as f64 * self.pitch,
            self.origin.1 + row as f64 * self.pitch,
        )
    }
}

/// Reduce a phase to `[0, 2pi)`.
pub fn wrap_phase(phi: f64) -> Result<f64> {
    if phi.is_nan() || phi.is_infinite() {
        return Err(Error::InvalidArgument(format!("cannot wrap phase {phi}")));
    }
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2pi for tiny negative inputs
    Ok(if w >= TAU { 0.0 } else { w })
}

/// Parameters of one panel's phase function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelPhase {
    /// Focusing power, m⁻¹; zero disables the focusing term.
    pub power: f64,
    /// Deflection angle, radians.
    pub theta: f64,
    pub lambda: f64,
}

impl PanelPhase {
    pub fn new(power: f64, theta: f64, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive, got {lambda}"
            )));
        }
        if power < 0.0 || !power.is_finite() || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "panel power must be finite and non-negative, got {power}"
            )));
        }
        Ok(Self {
            power,
            theta,
            lambda,
        })
    }

    /// Unwrapped phase at `(x, y)`.
    pub fn unwrapped(&self, x: f64, y: f64) -> f64 {
        let k = TAU / self.lambda;
        let mut phi = k * x * self.theta.sin();
        if self.power != 0.0 {
            let f = 1.0 / self.power;
            phi -= k * ((x * x + y * y + f * f).sqrt() - f);
        }
        phi
    }

    /// Analytic `(d phi/dx, d phi/dy)`.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let k = TAU / self.lambda;
        let mut g = (k * self.theta.sin(), 0.0);
        if self.power != 0.0 {
            let f = 1.0 / self.power;
            let rho = (x * x + y * y + f * f).sqrt();
            g.0 -= k * x / rho;
            g.1 -= k * y / rho;
        }
        g
    }

    /// Largest phase gradient magnitude over the grid, found at its corners
    /// since the focusing term grows monotonically with radius.
    pub fn max_gradient(&self, grid: &PhaseGrid) -> f64 {
        let (x0, y0) = grid.origin();
        let corners = [(x0, y0), (-x0, y0), (x0, -y0), (-x0, -y0)];
        corners
            .iter()
            .map(|&(x, y)| {
                let (gx, gy) = self.gradient(x, y);
                gx.abs().max(gy.abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Sample, wrap and return the panel's phase profile. Logs a warning when
/// the phase gradient at the panel edge exceeds the Nyquist limit
/// `pi / pitch`.
pub fn focusing_deflection_phase(panel: &PanelPhase, grid: &PhaseGrid) -> Result<PhaseProfile> {
    if !(grid.pitch > 0.0) || grid.width == 0 || grid.height == 0 {
        return Err(Error::InvalidArgument(format!(
            "phase grid must be non-empty with positive pitch, got {grid:?}"
        )));
    }
    let nyquist = PI / grid.pitch;
    let g = panel.max_gradient(grid);
    if g > nyquist {
        log::warn!(
            "phase gradient {g:.4e} rad/m at panel edge exceeds sampling limit {nyquist:.4e} rad/m"
        );
    }
    let origin = grid.origin();
    let mut values = Vec::with_capacity(grid.width * grid.height);
    for row in 0..grid.height {
        let y = origin.1 + row as f64 * grid.pitch;
        for col in 0..grid.width {
            let x = origin.0 + col as f64 * grid.pitch;
            values.push(wrap_phase(panel.unwrapped(x, y))?);
        }
    }
    Ok(PhaseProfile {
        width: grid.width,
        height: grid.height,
        pitch: grid.pitch,
        origin,
        values,
    })
}

/// Snap one wrapped phase to the nearest of `levels` equispaced levels,
/// ties to the lower level, with 0 and 2pi adjacent.
pub fn quantize_value(phi: f64, levels: usize) -> f64 {
    let step = TAU / levels as f64;
    let t = phi / step;
    let lo = t.floor();
    let k = if t - lo > 0.5 { lo + 1.0 } else { lo };
    let k = (k as i64).rem_euclid(levels as i64);
    k as f64 * step
}

pub fn quantize_phase(profile: &PhaseProfile, levels: usize) -> Result<PhaseProfile> {
    if levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 phase levels, got {levels}"
        )));
    }
    Ok(PhaseProfile {
        values: profile
            .values
            .iter()
            .map(|&v| quantize_value(v, levels))
            .collect(),
        ..profile.clone()
    })
}

/// Serialize as the phase CSV format: one comment header line, then rows
/// starting at the minimum y.
pub fn encode_phase_csv(profile: &PhaseProfile) -> String {
    let mut out = format!(
        "# pitch_m={} origin_x_m={} origin_y_m={}\n",
        profile.pitch, profile.origin.0, profile.origin.1
    );
    for row in profile.values.chunks(profile.width.max(1)) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.8}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn export_phase_csv(profile: &PhaseProfile, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(encode_phase_csv(profile).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn parse_phase_csv(text: &str, context: &str) -> Result<PhaseProfile> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(context, "empty phase file"))?;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::format(context, "missing '#' header line"))?;
    let mut fields = [None; 3];
    for tok in header.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::format(context, format!("bad header token {tok:?}")))?;
        let slot = match k {
            "pitch_m" => 0,
            "origin_x_m" => 1,
            "origin_y_m" => 2,
            _ => return Err(Error::format(context, format!("unknown header key {k:?}"))),
        };
        fields[slot] = Some(
            v.parse::<f64>()
                .map_err(|_| Error::format(context, format!("bad value for {k}")))?,
        );
    }
    let [Some(pitch), Some(ox), Some(oy)] = fields else {
        return Err(Error::format(context, "header lacks pitch or origin"));
    };
    let body: String = lines.collect::<Vec<_>>().join("\n");
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    let mut values = Vec::new();
    let mut width = None;
    let mut height = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::csv(context, e))?;
        if width.is_some_and(|w| w != rec.len()) {
            return Err(Error::format(context, format!("ragged row {height}")));
        }
        width = Some(rec.len());
        for cell in rec.iter() {
            values.push(
                cell.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::format(context, format!("bad phase value {cell:?}")))?,
            );
        }
        height += 1;
    }
    Ok(PhaseProfile {
        width: width.unwrap_or(0),
        height,
        pitch,
        origin: (ox, oy),
        values,
    })
}

pub fn read_phase_csv(path: &Path) -> Result<PhaseProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_phase_csv(&text, &path.display().to_string())
}

/// Phase-to-nanopillar-diameter lookup loaded from a `phase_rad,diameter_m`
/// table.
#[derive(Debug, Clone, PartialEq)]
pub struct PillarTable {
    entries: Vec<(f64, f64)>,
}

#[derive(serde::Deserialize)]
struct PillarRow {
    phase_rad: f64,
    diameter_m: f64,
}

impl PillarTable {
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::csv(context, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["phase_rad", "diameter_m"] {
            return Err(Error::format(context, "header must be phase_rad,diameter_m"));
        }
        let mut entries = Vec::new();
        for row in rdr.deserialize::<PillarRow>() {
            let row = row.map_err(|e| Error::csv(context, e))?;
            entries.push((wrap_phase(row.phase_rad)?, row.diameter_m));
        }
        if entries.is_empty() {
            return Err(Error::format(context, "lookup table has no rows"));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Diameter of the entry closest in circular phase distance; the first
    /// row wins ties.
    pub fn diameter_for(&self, phi: f64) -> f64 {
        let dist = |a: f64| {
            let d = (a - phi).rem_euclid(TAU);
            d.min(TAU - d)
        };
        let mut best = self.entries[0];
        for &e in &self.entries[1..] {
            if dist(e.0) < dist(best.0) {
                best = e;
            }
        }
        best.1
    }

    pub fn apply(&self, profile: &PhaseProfile) -> Vec<f64> {
        profile.values.iter().map(|&v| self.diameter_for(v)).collect()
    }
}
