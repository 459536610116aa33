//! Confidence-weighted summaries of depth maps.

use serde::{Deserialize, Serialize};

use super::depth::DepthMap;
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Default histogram bin width, metres.
pub const DEFAULT_BIN_WIDTH: f64 = 0.25e-3;

/// Bins `[k * bin_width, (k + 1) * bin_width)` for `k` from `first_bin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub first_bin: i64,
    pub weights: Vec<f64>,
}

impl Histogram {
    pub fn bin_start(&self, i: usize) -> f64 {
        (self.first_bin + i as i64) as f64 * self.bin_width
    }

    pub fn occupied(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthAggregate {
    pub histogram: Histogram,
    /// Confidence-weighted median depth, metres.
    pub point_estimate: f64,
    /// `(depth, confidence)` of every valid pixel.
    pub samples: Vec<(f64, f64)>,
}

/// Lower weighted median: the smallest value whose cumulative weight
/// reaches half the total.
pub fn weighted_median(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = CompensatedSum::default();
    for &(_, w) in &s {
        total.add(w);
    }
    let half = 0.5 * total.value();
    let mut acc = CompensatedSum::default();
    for &(z, w) in &s {
        acc.add(w);
        if acc.value() >= half {
            return Some(z);
        }
    }
    s.last().map(|p| p.0)
}

pub fn histogram(samples: &[(f64, f64)], bin_width: f64) -> Histogram {
    let idx = |z: f64| (z / bin_width).floor() as i64;
    let lo = samples.iter().map(|s| idx(s.0)).min().unwrap_or(0);
    let hi = samples.iter().map(|s| idx(s.0)).max().unwrap_or(-1);
    let mut weights = vec![0.0; (hi - lo + 1).max(0) as usize];
    for &(z, w) in samples {
        weights[(idx(z) - lo) as usize] += w;
    }
    Histogram {
        bin_width,
        first_bin: lo,
        weights,
    }
}

pub fn aggregate_depth(dm: &DepthMap, bin_width: f64) -> Result<DepthAggregate> {
    if !(bin_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    let samples = dm.samples();
    let point_estimate = weighted_median(&samples)
        .ok_or_else(|| Error::NoValidDepth("depth map has no valid pixels".into()))?;
    Ok(DepthAggregate {
        histogram: histogram(&samples, bin_width),
        point_estimate,
        samples,
    })
}

/// One row of the evaluation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub true_depth_mm: f64,
    pub mean_pred_mm: f64,
    pub mae_mm: f64,
    pub frac_within_5pct: f64,
    pub n_valid: usize,
}

/// Confidence-weighted mean, MAE and 5 % band fraction per true depth.
pub fn eval_metrics(estimates: &[DepthMap], truths: &[f64]) -> Result<Vec<MetricsRow>> {
    if estimates.len() != truths.len() {
        return Err(Error::InvalidArgument(format!(
            "{} depth maps for {} true depths",
            estimates.len(),
            truths.len()
        )));
    }
    estimates
        .iter()
        .zip(truths)
        .map(|(dm, &truth)| {
            let samples = dm.samples();
            if samples.is_empty() {
                return Err(Error::NoValidDepth(format!(
                    "no valid pixels at true depth {:.3} mm",
                    truth * 1e3
                )));
            }
            Ok(metrics_row(&samples, truth))
        })
        .collect()
}

pub fn metrics_row(samples: &[(f64, f64)], truth: f64) -> MetricsRow {
    let mut wsum = CompensatedSum::default();
    let mut zsum = CompensatedSum::default();
    let mut esum = CompensatedSum::default();
    let mut inside = CompensatedSum::default();
    for &(z, w) in samples {
        let err = (z - truth).abs();
        wsum.add(w);
        zsum.add(w * z);
        esum.add(w * err);
        if err <= 0.05 * truth {
            inside.add(w);
        }
    }
    let total = wsum.value();
    MetricsRow {
        true_depth_mm: truth * 1e3,
        mean_pred_mm: zsum.value() / total * 1e3,
        mae_mm: esum.value() / total * 1e3,
        frac_within_5pct: inside.value() / total,
        n_valid: samples.len(),
    }
}
