//! The seven commands of the command-line front end. Each writes its
//! artifacts under an output directory and returns what it computed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::artifacts::{
    read_stack_index, write_depth_map, write_json, write_metrics_csv, write_stack_index,
    DepthMapMeta, StackEntry,
};
use super::config::{DesignSpec, ExperimentConfig};
use super::pipeline::{
    calibration_samples, differential_from_capture, estimate_depth, point_capture, Differential,
};
use super::svg::{band_svg, histogram_svg};
use crate::calibration::{
    fit_robust, write_samples_csv, CalibrationResult, CalibrationSample, DEFAULT_MAX_ITER,
};
use crate::dfdd::{aggregate_depth, eval_metrics, DfddConfig, MetricsRow};
use crate::error::{Error, Result};
use crate::metasurface::{
    export_phase_csv, focusing_deflection_phase, quantize_phase, PanelPhase, PhaseGrid,
    PhaseProfile,
};
use crate::optics::{consistent_side_powers, solve_layout_report, LayoutReport};
use crate::pnm::write_pfm;
use crate::render::noise::derive_seed;
use crate::render::{extract_subimages, render_capture, RawCapture, SceneSpec};

/// Evaluation range over which `eval` demands sub-millimetre MAE, metres.
pub const EVAL_RANGE: (f64, f64) = (0.012, 0.020);
/// MAE bound checked by `eval`, millimetres.
pub const MAE_LIMIT_MM: f64 = 1.0;
/// Stream offset separating auto-calibration captures from evaluation
/// captures.
const CALIBRATION_SALT: u64 = 1 << 32;

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Solve both channel assignments and write `design.json` (the full
/// report) and, when feasible, `optical_config.json`. With
/// `derive_powers` the side powers are replaced by the ones consistent
/// with the targets.
pub fn cmd_design(spec: &DesignSpec, derive_powers: bool, out: &Path) -> Result<LayoutReport> {
    let (r1, r3) = if derive_powers {
        consistent_side_powers(spec.targets)
    } else {
        (spec.rho_1, spec.rho_3)
    };
    let report = solve_layout_report(spec.targets, r1, r3, spec.track_budget)?;
    ensure_dir(out)?;
    write_json(&out.join("design.json"), &report)?;
    match report.selected_outcome() {
        Some(best) => {
            write_json(&out.join("optical_config.json"), &best.config)?;
            Ok(report)
        }
        None => Err(report.infeasibility()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    /// Channel 1.
    Left,
    /// Channel 3.
    Right,
}

impl std::str::FromStr for Panel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Panel::Left),
            "right" => Ok(Panel::Right),
            _ => Err(Error::InvalidArgument(format!(
                "panel must be left or right, got {s:?}"
            ))),
        }
    }
}

/// Quantized phase profile of one side panel, written as
/// `phase_<left|right>.csv`.
pub fn cmd_phase(panel: Panel, exp: &ExperimentConfig, out: &Path) -> Result<PhaseProfile> {
    let cfg = &exp.optical;
    let ch = cfg.channel(match panel {
        Panel::Left => 1,
        Panel::Right => 3,
    });
    let phase = PanelPhase::new(ch.power, ch.deflection, cfg.lambda)?;
    let grid = PhaseGrid::covering(cfg.panel_width, cfg.panel_height, exp.phase.pitch);
    let profile = quantize_phase(&focusing_deflection_phase(&phase, &grid)?, exp.phase.levels)?;
    ensure_dir(out)?;
    let name = match panel {
        Panel::Left => "phase_left.csv",
        Panel::Right => "phase_right.csv",
    };
    export_phase_csv(&profile, &out.join(name))?;
    Ok(profile)
}

/// Render a scene file to `capture.pgm` plus its layout sidecar.
pub fn cmd_render(scene_path: &Path, exp: &ExperimentConfig, out: &Path) -> Result<RawCapture> {
    let scene = SceneSpec::load(scene_path)?;
    let base = scene_path.parent().unwrap_or(Path::new("."));
    let targets = scene.build(base)?;
    let cap = render_capture(
        &targets,
        &exp.optical,
        &exp.effective_sensor(),
        exp.noise.is_on(),
        exp.seed,
    )?;
    ensure_dir(out)?;
    cap.write(&out.join("capture.pgm"))?;
    Ok(cap)
}

fn stack_capture(exp: &ExperimentConfig, z: f64, seed: u64) -> Result<RawCapture> {
    point_capture(
        &exp.optical,
        &exp.effective_sensor(),
        z,
        exp.noise.is_on(),
        seed,
    )
    .map_err(|e| with_depth(e, z))
}

fn with_depth(e: Error, z: f64) -> Error {
    let at = |m: String| format!("at depth {:.3} mm: {m}", z * 1e3);
    match e {
        Error::InvalidConfig(m) => Error::InvalidConfig(at(m)),
        Error::SensorTooSmall(m) => Error::SensorTooSmall(at(m)),
        Error::NoFiniteConjugate(m) => Error::NoFiniteConjugate(at(m)),
        Error::AlignmentUnreliable(m) => Error::AlignmentUnreliable(at(m)),
        Error::NoValidDepth(m) => Error::NoValidDepth(at(m)),
        other => other,
    }
}

/// Point-source captures at every configured depth: `zNN.pgm` with its
/// sidecar, the close-range sub-images `zNN_i1.pfm` and `zNN_i3.pfm`, and
/// `index.csv`.
pub fn cmd_psf_stack(exp: &ExperimentConfig, out: &Path) -> Result<Vec<StackEntry>> {
    if exp.depths.is_empty() {
        return Err(Error::InvalidConfig("depth list is empty".into()));
    }
    ensure_dir(out)?;
    let mut entries = Vec::with_capacity(exp.depths.len());
    for (k, &z) in exp.depths.iter().enumerate() {
        let cap = stack_capture(exp, z, derive_seed(exp.seed, k as u64))?;
        let stem = format!("z{k:02}");
        let entry = StackEntry {
            depth_mm: z * 1e3,
            capture: format!("{stem}.pgm"),
            i1: format!("{stem}_i1.pfm"),
            i3: format!("{stem}_i3.pfm"),
        };
        cap.write(&out.join(&entry.capture))?;
        let [i1, _, i3] = extract_subimages(&cap)?;
        write_pfm(&out.join(&entry.i1), &i1)?;
        write_pfm(&out.join(&entry.i3), &i3)?;
        entries.push(entry);
    }
    write_stack_index(out, &entries)?;
    Ok(entries)
}

/// Differential images of every frame in a stack directory, with the
/// frame depths in metres.
pub fn load_stack(stack_dir: &Path, dcfg: &DfddConfig) -> Result<Vec<(f64, Differential)>> {
    let entries = read_stack_index(stack_dir)?;
    if entries.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "stack {} lists no frames",
            stack_dir.display()
        )));
    }
    entries
        .iter()
        .map(|e| {
            let z = e.depth_mm * 1e-3;
            let cap = RawCapture::read(&stack_dir.join(&e.capture))?;
            let d = differential_from_capture(&cap, dcfg).map_err(|err| with_depth(err, z))?;
            Ok((z, d))
        })
        .collect()
}

fn fit_frames(frames: &[(f64, Differential)]) -> Result<(CalibrationResult, Vec<CalibrationSample>)> {
    let samples: Vec<CalibrationSample> = frames
        .iter()
        .flat_map(|(z, d)| calibration_samples(d, *z))
        .collect();
    let fit = fit_robust(&samples, None, DEFAULT_MAX_ITER)?;
    Ok((fit, samples))
}

/// Fit `A`, `B` to a PSF stack; writes `calibration.json` and the samples
/// as `calibration_samples.csv`.
pub fn cmd_calibrate(stack_dir: &Path, dcfg: &DfddConfig, out: &Path) -> Result<CalibrationResult> {
    let frames = load_stack(stack_dir, dcfg)?;
    let (fit, samples) = fit_frames(&frames)?;
    ensure_dir(out)?;
    write_samples_csv(&out.join("calibration_samples.csv"), &samples)?;
    write_json(&out.join("calibration.json"), &fit)?;
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthSummary {
    /// Confidence-weighted median depth, metres.
    pub point_estimate_m: f64,
    pub n_valid: usize,
    pub shift: (f64, f64),
}

/// Range one capture: writes `depth.pfm` with `depth.json`,
/// `confidence.pfm` and `summary.json`.
pub fn cmd_depth(
    capture_path: &Path,
    params_path: &Path,
    dcfg: &DfddConfig,
    out: &Path,
) -> Result<DepthSummary> {
    let params = CalibrationResult::load(params_path)?.params();
    let cap = RawCapture::read(capture_path)?;
    let d = differential_from_capture(&cap, dcfg)?;
    let dm = estimate_depth(&d, &params);
    let agg = aggregate_depth(&dm, dcfg.bin_width)?;
    let summary = DepthSummary {
        point_estimate_m: agg.point_estimate,
        n_valid: dm.n_valid(),
        shift: d.shift,
    };
    ensure_dir(out)?;
    let meta = DepthMapMeta {
        params,
        thresholds: d.thresholds,
        shift: d.shift,
        n_valid: dm.n_valid(),
    };
    write_depth_map(&out.join("depth.pfm"), &dm, &meta)?;
    write_pfm(&out.join("confidence.pfm"), &dm.confidence)?;
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Depths halfway between consecutive sweep depths.
pub fn offset_depths(depths: &[f64]) -> Vec<f64> {
    depths.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<MetricsRow>,
    pub calibration: CalibrationResult,
}

/// Calibrate on the offset depths unless `params` is given, evaluate at
/// every sweep depth, and write `metrics.csv`, `hist_NN.svg`, `band.svg`
/// and `calibration.json`. Returns `TargetMissed` after writing when the
/// MAE bound fails inside the evaluation range.
pub fn cmd_eval(
    exp: &ExperimentConfig,
    params: Option<CalibrationResult>,
    out: &Path,
) -> Result<EvalReport> {
    exp.validate()?;
    if exp.depths.is_empty() {
        return Err(Error::InvalidConfig("depth list is empty".into()));
    }
    let calibration = match params {
        Some(p) => p,
        None => {
            let cal_depths = offset_depths(&exp.depths);
            if cal_depths.len() < 2 {
                return Err(Error::InvalidConfig(
                    "auto-calibration needs at least three sweep depths".into(),
                ));
            }
            let frames = cal_depths
                .iter()
                .enumerate()
                .map(|(k, &z)| {
                    let seed = derive_seed(exp.seed, CALIBRATION_SALT + k as u64);
                    let cap = stack_capture(exp, z, seed)?;
                    Ok((z, differential_from_capture(&cap, &exp.dfdd).map_err(|e| with_depth(e, z))?))
                })
                .collect::<Result<Vec<_>>>()?;
            fit_frames(&frames)?.0
        }
    };
    let params = calibration.params();
    let mut maps = Vec::with_capacity(exp.depths.len());
    for (k, &z) in exp.depths.iter().enumerate() {
        let cap = stack_capture(exp, z, derive_seed(exp.seed, k as u64))?;
        let d = differential_from_capture(&cap, &exp.dfdd).map_err(|e| with_depth(e, z))?;
        maps.push(estimate_depth(&d, &params));
    }
    let rows = eval_metrics(&maps, &exp.depths)?;
    ensure_dir(out)?;
    write_json(&out.join("calibration.json"), &calibration)?;
    write_metrics_csv(&out.join("metrics.csv"), &rows)?;
    for (k, (dm, &z)) in maps.iter().zip(&exp.depths).enumerate() {
        let agg = aggregate_depth(dm, exp.dfdd.bin_width)?;
        let path = out.join(format!("hist_{k:02}.svg"));
        std::fs::write(&path, histogram_svg(&agg.histogram, z)).map_err(|e| Error::io(&path, e))?;
    }
    let band = out.join("band.svg");
    std::fs::write(&band, band_svg(&rows)).map_err(|e| Error::io(&band, e))?;
    let failing: Vec<&MetricsRow> = rows
        .iter()
        .filter(|r| {
            let z = r.true_depth_mm * 1e-3;
            z >= EVAL_RANGE.0 - 1e-12 && z <= EVAL_RANGE.1 + 1e-12 && !(r.mae_mm < MAE_LIMIT_MM)
        })
        .collect();
    if let Some(r) = failing.first() {
        return Err(Error::TargetMissed(format!(
            "MAE {:.3} mm at {:.1} mm is not below {MAE_LIMIT_MM} mm ({} depths fail)",
            r.mae_mm,
            r.true_depth_mm,
            failing.len()
        )));
    }
    Ok(EvalReport { rows, calibration })
}
