//! Least-squares fitting of the depth-equation constants `A`, `B`.
//!
//! Rearranged, the depth equation is linear in the unknowns:
//! `z (A lap + B drho) - lap = 0`. Each sample contributes that residual
//! with a non-negative weight.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dfdd::DfddParams;
use crate::error::{Error, Result};
use crate::numeric::{quantile, CompensatedSum};

/// Above this scaled condition number the design is treated as rank
/// deficient.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative parameter change that ends the robust iteration.
const IRLS_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 50;
/// Huber tuning constant in units of the MAD-based residual scale.
const HUBER_K: f64 = 1.345;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    pub lap: f64,
    pub drho: f64,
    #[serde(rename = "z_true_m")]
    pub z_true: f64,
    pub weight: f64,
}

impl CalibrationSample {
    /// Sample weighted by signal strength `|lap|`.
    pub fn new(lap: f64, drho: f64, z_true: f64) -> Self {
        Self {
            lap,
            drho,
            z_true,
            weight: lap.abs(),
        }
    }

    /// Linearized residual `z (A lap + B drho) - lap`.
    pub fn residual(&self, p: &DfddParams) -> f64 {
        self.z_true * (p.a_param * self.lap + p.b_param * self.drho) - self.lap
    }

    pub fn predicted_depth(&self, p: &DfddParams) -> f64 {
        self.lap / (p.a_param * self.lap + p.b_param * self.drho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub a_param: f64,
    pub b_param: f64,
    /// Weighted RMS of predicted minus true depth, metres.
    pub rms_residual: f64,
    pub n_used: usize,
    /// Condition number of the column-equilibrated normal matrix.
    pub condition: f64,
}

impl CalibrationResult {
    pub fn params(&self) -> DfddParams {
        DfddParams {
            a_param: self.a_param,
            b_param: self.b_param,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("calibration result", e))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self =
            serde_json::from_str(text).map_err(|e| Error::json("calibration result", e))?;
        r.params().validate()?;
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn validate_samples(samples: &[CalibrationSample]) -> Result<()> {
    for (i, s) in samples.iter().enumerate() {
        if !(s.z_true > 0.0)
            || !s.z_true.is_finite()
            || !(s.weight >= 0.0)
            || !s.weight.is_finite()
            || !s.lap.is_finite()
            || !s.drho.is_finite()
        {
            return Err(Error::InvalidArgument(format!(
                "sample {i} is invalid: {s:?}"
            )));
        }
    }
    Ok(())
}

/// Weighted normal equations for per-sample weights `w`.
fn solve_weighted(samples: &[CalibrationSample], w: &[f64]) -> Result<(DfddParams, f64, usize)> {
    let mut n11 = CompensatedSum::default();
    let mut n12 = CompensatedSum::default();
    let mut n22 = CompensatedSum::default();
    let mut r1 = CompensatedSum::default();
    let mut r2 = CompensatedSum::default();
    let mut used = 0;
    for (s, &wi) in samples.iter().zip(w) {
        if wi <= 0.0 {
            continue;
        }
        used += 1;
        let x1 = s.z_true * s.lap;
        let x2 = s.z_true * s.drho;
        n11.add(wi * x1 * x1);
        n12.add(wi * x1 * x2);
        n22.add(wi * x2 * x2);
        r1.add(wi * x1 * s.lap);
        r2.add(wi * x2 * s.lap);
    }
    if used < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples with positive weight, have {used}"
        )));
    }
    let (a, b, c) = (n11.value(), n12.value(), n22.value());
    let (y1, y2) = (r1.value(), r2.value());
    if !(a > 0.0) {
        return Err(Error::Unidentifiable("all Laplacian samples are zero".into()));
    }
    if !(c > 0.0) {
        return Err(Error::Unidentifiable("drho is zero in every sample".into()));
    }
    // equilibrate before judging rank
    let (sa, sc) = (a.sqrt(), c.sqrt());
    let (ea, eb, ec) = (1.0, b / (sa * sc), 1.0);
    let tr = ea + ec;
    let det = ea * ec - eb * eb;
    let disc = ((ea - ec).powi(2) + 4.0 * eb * eb).sqrt();
    let lmax = 0.5 * (tr + disc);
    let lmin = det / lmax;
    let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(Error::Unidentifiable(format!(
            "design matrix is rank deficient (condition {condition:.3e}); drho is proportional to lap"
        )));
    }
    // Gaussian elimination with partial pivoting on the 2x2 system
    let (p, q) = if a.abs() >= b.abs() {
        let f = b / a;
        let bq = (y2 - f * y1) / (c - f * b);
        ((y1 - b * bq) / a, bq)
    } else {
        let f = a / b;
        let bq = (y1 - f * y2) / (b - f * c);
        ((y2 - c * bq) / b, bq)
    };
    let params = DfddParams {
        a_param: p,
        b_param: q,
    };
    if !p.is_finite() || !q.is_finite() {
        return Err(Error::Unidentifiable("normal equations produced non-finite values".into()));
    }
    Ok((params, condition, used))
}

fn finish(
    samples: &[CalibrationSample],
    params: DfddParams,
    condition: f64,
    n_used: usize,
) -> Result<CalibrationResult> {
    if !(params.a_param > 0.0) {
        return Err(Error::Unidentifiable(format!(
            "fitted A = {:.6e} is not positive",
            params.a_param
        )));
    }
    let mut num = CompensatedSum::default();
    let mut den = CompensatedSum::default();
    for s in samples.iter().filter(|s| s.weight > 0.0) {
        let e = s.predicted_depth(&params) - s.z_true;
        if e.is_finite() {
            num.add(s.weight * e * e);
            den.add(s.weight);
        }
    }
    let rms_residual = if den.value() > 0.0 {
        (num.value() / den.value()).sqrt()
    } else {
        0.0
    };
    Ok(CalibrationResult {
        a_param: params.a_param,
        b_param: params.b_param,
        rms_residual,
        n_used,
        condition,
    })
}

/// Weighted linear least squares via the 2x2 normal equations.
pub fn fit_linear(samples: &[CalibrationSample]) -> Result<CalibrationResult> {
    validate_samples(samples)?;
    let w: Vec<f64> = samples.iter().map(|s| s.weight).collect();
    let (params, condition, used) = solve_weighted(samples, &w)?;
    finish(samples, params, condition, used)
}

/// Iteratively reweighted least squares with Huber weights on the
/// linearized residual. Without an explicit `huber_delta` the threshold is
/// 1.345 times the MAD-based scale of the current residuals.
pub fn fit_robust(
    samples: &[CalibrationSample],
    huber_delta: Option<f64>,
    max_iter: usize,
) -> Result<CalibrationResult> {
    validate_samples(samples)?;
    if let Some(d) = huber_delta {
        if !(d > 0.0) {
            return Err(Error::InvalidArgument(format!("huber_delta must be positive, got {d}")));
        }
    }
    let base: Vec<f64> = samples.iter().map(|s| s.weight).collect();
    let (mut params, mut condition, mut used) = solve_weighted(samples, &base)?;
    for _ in 0..max_iter {
        let r: Vec<f64> = samples.iter().map(|s| s.residual(&params)).collect();
        let delta = match huber_delta {
            Some(d) => d,
            None => {
                let abs: Vec<f64> = r
                    .iter()
                    .zip(&base)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(v, _)| v.abs())
                    .collect();
                HUBER_K * 1.4826 * quantile(&abs, 0.5).unwrap_or(0.0)
            }
        };
        if !(delta > 0.0) {
            break;
        }
        let w: Vec<f64> = r
            .iter()
            .zip(&base)
            .map(|(&ri, &wi)| if ri.abs() <= delta { wi } else { wi * delta / ri.abs() })
            .collect();
        let (next, cond, n) = solve_weighted(samples, &w)?;
        let change = ((next.a_param - params.a_param) / params.a_param)
            .abs()
            .max(((next.b_param - params.b_param) / params.b_param).abs());
        params = next;
        condition = cond;
        used = n;
        if !(change >= IRLS_TOL) {
            break;
        }
    }
    finish(samples, params, condition, used)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRow {
    pub z_true: f64,
    pub z_pred: f64,
    /// `z_pred - z_true`, metres.
    pub depth_residual: f64,
    /// Linearized residual.
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
    /// `(p, quantile of depth_residual)` for p in 0, 0.05, 0.25, 0.5, 0.75,
    /// 0.95, 1.
    pub quantiles: Vec<(f64, f64)>,
}

pub const REPORT_QUANTILES: [f64; 7] = [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0];

pub fn residual_report(samples: &[CalibrationSample], params: &DfddParams) -> ResidualReport {
    let rows: Vec<ResidualRow> = samples
        .iter()
        .map(|s| {
            let z_pred = s.predicted_depth(params);
            ResidualRow {
                z_true: s.z_true,
                z_pred,
                depth_residual: z_pred - s.z_true,
                r: s.residual(params),
            }
        })
        .collect();
    let finite: Vec<f64> = rows
        .iter()
        .map(|r| r.depth_residual)
        .filter(|v| v.is_finite())
        .collect();
    let quantiles = REPORT_QUANTILES
        .iter()
        .filter_map(|&p| quantile(&finite, p).map(|q| (p, q)))
        .collect();
    ResidualReport { rows, quantiles }
}

pub fn write_samples_csv(path: &Path, samples: &[CalibrationSample]) -> Result<()> {
    let ctx = path.display().to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(&ctx, e))?;
    for s in samples {
        w.serialize(s).map_err(|e| Error::csv(&ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_samples_csv(path: &Path) -> Result<Vec<CalibrationSample>> {
    let ctx = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(&ctx, e))?;
    let headers = r.headers().map_err(|e| Error::csv(&ctx, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["lap", "drho", "z_true_m", "weight"] {
        return Err(Error::format(&ctx, "header must be lap,drho,z_true_m,weight"));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::csv(&ctx, e)))
        .collect()
}
