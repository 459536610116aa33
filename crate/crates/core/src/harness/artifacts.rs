//! Files written and read by the commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dfdd::{DepthMap, DfddParams, MetricsRow, Thresholds};
use crate::error::{Error, Result};
use crate::pnm::{read_pfm, write_pfm};
use crate::raster::Mask;

pub const METRICS_HEADER: &str = "true_depth_mm,mean_pred_mm,mae_mm,frac_within_5pct,n_valid";

/// Sidecar of a depth-map PFM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthMapMeta {
    pub params: DfddParams,
    pub thresholds: Thresholds,
    /// I1 -> I3 shift, pixels.
    pub shift: (f64, f64),
    pub n_valid: usize,
}

pub fn json_sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::json(path.display().to_string(), e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

/// Depth PFM (zero where invalid) plus `<stem>.json`.
pub fn write_depth_map(path: &Path, dm: &DepthMap, meta: &DepthMapMeta) -> Result<()> {
    write_pfm(path, &dm.depth)?;
    write_json(&json_sidecar(path), meta)
}

/// Depth map and sidecar; validity is recovered as `depth > 0` and the
/// confidence is not stored, so it reads back as the validity indicator.
pub fn read_depth_map(path: &Path) -> Result<(DepthMap, DepthMapMeta)> {
    let depth = read_pfm(path)?;
    let meta: DepthMapMeta = read_json(&json_sidecar(path))?;
    let mut valid = Mask::filled(depth.width(), depth.height(), false);
    for y in 0..depth.height() {
        for x in 0..depth.width() {
            valid.set(x, y, depth.get(x, y) > 0.0);
        }
    }
    let confidence = depth.map(|z| if z > 0.0 { 1.0 } else { 0.0 });
    Ok((
        DepthMap {
            depth,
            confidence,
            valid,
        },
        meta,
    ))
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let ctx = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(&ctx, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(&ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let ctx = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(&ctx, e))?;
    let header = r.headers().map_err(|e| Error::csv(&ctx, e))?;
    if header.iter().collect::<Vec<_>>().join(",") != METRICS_HEADER {
        return Err(Error::format(&ctx, format!("header must be {METRICS_HEADER}")));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::csv(&ctx, e)))
        .collect()
}

/// One depth of a PSF stack; file names are relative to the stack
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackEntry {
    pub depth_mm: f64,
    pub capture: String,
    pub i1: String,
    pub i3: String,
}

pub const STACK_INDEX: &str = "index.csv";

pub fn write_stack_index(dir: &Path, entries: &[StackEntry]) -> Result<()> {
    let path = dir.join(STACK_INDEX);
    let ctx = path.display().to_string();
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&ctx, e))?;
    for e in entries {
        w.serialize(e).map_err(|err| Error::csv(&ctx, err))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn read_stack_index(dir: &Path) -> Result<Vec<StackEntry>> {
    let path = dir.join(STACK_INDEX);
    let ctx = path.display().to_string();
    let mut r = csv::Reader::from_path(&path).map_err(|e| Error::csv(&ctx, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::csv(&ctx, e)))
        .collect()
}
