//! Recovery of the lens power and spacings `(rho_L, s1, s2)` from three
//! target focal distances.
//!
//! Each channel contributes the residual `S.a Z + S.b`. The problem is
//! solved by damped least squares from a fixed grid of seeds, separately
//! for the two ways of pairing the side channels with the near targets.

use serde::{Deserialize, Serialize};

use super::config::{OpticalSystemConfig, DEFAULT_TRACK_BUDGET};
use super::focus::{channel_system_matrix, focal_object_distance, imaging_residual};
use crate::error::{Error, Result};

/// Per-channel residual below which a layout counts as solved, metres.
pub const RESIDUAL_TOL: f64 = 1e-9;
const MAX_ITER: usize = 200;
const RHO_L_MAX: f64 = 1000.0;
const RHO_L_SEEDS: [f64; 4] = [50.0, 50.0 + 350.0 / 3.0, 50.0 + 700.0 / 3.0, 400.0];
const S1_SEEDS: [f64; 3] = [0.5e-3, 5.25e-3, 10e-3];
const S2_SEEDS: [f64; 3] = [1e-3, 7.5e-3, 14e-3];

/// Focal distances of a layout and how well they hit the targets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FocalSolution {
    /// In-focus object distance per channel, metres.
    pub z_f: [f64; 3],
    /// `S.a Z_target + S.b` per channel, metres.
    pub residuals: [f64; 3],
    pub track_length: f64,
}

/// Which target each side channel is asked to focus on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assignment {
    /// Channel 1 takes the first target, channel 3 the third.
    Direct,
    /// Channel 1 takes the third target, channel 3 the first.
    Swapped,
}

impl Assignment {
    /// Target distance for channels 1, 2, 3.
    pub fn per_channel(self, targets: [f64; 3]) -> [f64; 3] {
        match self {
            Assignment::Direct => targets,
            Assignment::Swapped => [targets[2], targets[1], targets[0]],
        }
    }
}

/// Best result found for one assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentOutcome {
    pub assignment: Assignment,
    pub config: OpticalSystemConfig,
    /// Largest absolute per-channel residual, metres.
    pub max_residual: f64,
    pub residuals: [f64; 3],
    pub converged: bool,
    /// Index into the seed grid the reported layout started from.
    pub seed_index: usize,
}

/// Outcomes of both assignments and the one selected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutReport {
    pub targets: [f64; 3],
    pub track_budget: f64,
    pub outcomes: [AssignmentOutcome; 2],
    /// Index into `outcomes`, present when at least one converged.
    pub selected: Option<usize>,
}

impl LayoutReport {
    pub fn selected_outcome(&self) -> Option<&AssignmentOutcome> {
        self.selected.map(|i| &self.outcomes[i])
    }

    /// Diagnostic for a report with no converged assignment.
    pub fn infeasibility(&self) -> Error {
        let best = self
            .outcomes
            .iter()
            .min_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
            .expect("two outcomes");
        let (r1, r3) = consistent_side_powers(self.targets);
        Error::LayoutInfeasible(format!(
            "no seed reached residual {RESIDUAL_TOL:e} m within track budget {} m; \
             best residual {:.3e} m ({:?} assignment); side powers consistent with the \
             targets would be rho_1 = {r1:.4}, rho_3 = {r3:.4} m^-1",
            self.track_budget, best.max_residual, best.assignment,
        ))
    }
}

/// Side-channel powers that make the three targets simultaneously
/// reachable: `rho_ch = 1/Z_ch - 1/Z_2`.
///
/// Every channel shares the lens and spacings, so the imaging condition for
/// channel `ch` reduces to `M.a + M.b (1/Z_ch - rho_ch) = 0` with `M` the
/// shared part; all three hold at once only if `1/Z_ch - rho_ch` agrees.
pub fn consistent_side_powers(targets: [f64; 3]) -> (f64, f64) {
    (1.0 / targets[0] - 1.0 / targets[1], 1.0 / targets[2] - 1.0 / targets[1])
}

/// Run the solver for both assignments without failing on infeasibility.
pub fn solve_layout_report(
    targets: [f64; 3],
    rho_1: f64,
    rho_3: f64,
    track_budget: f64,
) -> Result<LayoutReport> {
    for (i, &t) in targets.iter().enumerate() {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "target distance {} must be positive and finite, got {t}",
                i + 1
            )));
        }
    }
    if !rho_1.is_finite() || !rho_3.is_finite() {
        return Err(Error::InvalidConfig("side powers must be finite".into()));
    }
    if !(track_budget > 0.0) || !track_budget.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "track budget must be positive, got {track_budget}"
        )));
    }
    let template = OpticalSystemConfig::with_layout(rho_1, rho_3, 0.0, 0.0, 0.0);
    let outcomes = [Assignment::Direct, Assignment::Swapped]
        .map(|a| solve_assignment(&template, a.per_channel(targets), track_budget, a));
    let selected = outcomes.iter().position(|o| o.converged);
    Ok(LayoutReport {
        targets,
        track_budget,
        outcomes,
        selected,
    })
}

/// Find `(rho_L, s1, s2)` bringing channels 1 to 3 into focus at the
/// targets, keeping `s1 + s2` within the budget. Both pairings of the side
/// channels with the first and third target are tried; the direct pairing
/// wins when both converge.
pub fn solve_layout(
    targets: [f64; 3],
    rho_1: f64,
    rho_3: f64,
    track_budget: f64,
) -> Result<(OpticalSystemConfig, FocalSolution, Assignment)> {
    let report = solve_layout_report(targets, rho_1, rho_3, track_budget)?;
    let Some(best) = report.selected_outcome() else {
        return Err(report.infeasibility());
    };
    let cfg = best.config.clone();
    let solution = focal_solution(&cfg, best.assignment.per_channel(targets))?;
    Ok((cfg, solution, best.assignment))
}

/// Focal distances and target residuals of a finished layout.
pub fn focal_solution(cfg: &OpticalSystemConfig, per_channel: [f64; 3]) -> Result<FocalSolution> {
    let mut z_f = [0.0; 3];
    let mut residuals = [0.0; 3];
    for (i, ch) in cfg.channels().iter().enumerate() {
        let s = channel_system_matrix(cfg, ch);
        z_f[i] = focal_object_distance(&s)?;
        residuals[i] = imaging_residual(&s, per_channel[i]);
    }
    Ok(FocalSolution {
        z_f,
        residuals,
        track_length: cfg.track_length(),
    })
}

/// Layout for the published focal planes (14 mm, 400 mm, 20 mm) using the
/// consistent side powers, channel 1 focusing nearest.
pub fn reference_design() -> Result<(OpticalSystemConfig, FocalSolution)> {
    let targets = REFERENCE_TARGETS;
    let (r1, r3) = consistent_side_powers(targets);
    let (cfg, sol, _) = solve_layout(targets, r1, r3, DEFAULT_TRACK_BUDGET)?;
    Ok((cfg, sol))
}

/// Focal distances of channels 1, 2, 3 in the reference design, metres.
pub const REFERENCE_TARGETS: [f64; 3] = [0.014, 0.40, 0.020];

// Parameter scaling: x = (rho_L / 100, s1 / 1 mm, s2 / 1 mm).
const SCALE: [f64; 3] = [100.0, 1e-3, 1e-3];

fn unscale(x: [f64; 3]) -> (f64, f64, f64) {
    (x[0] * SCALE[0], x[1] * SCALE[1], x[2] * SCALE[2])
}

fn feasible(x: [f64; 3], budget: f64) -> bool {
    let (rl, s1, s2) = unscale(x);
    rl > 0.0 && rl <= RHO_L_MAX && s1 > 0.0 && s2 > 0.0 && s1 + s2 <= budget
}

fn residuals(
    template: &OpticalSystemConfig,
    x: [f64; 3],
    z: [f64; 3],
) -> ([f64; 3], [[f64; 3]; 3]) {
    let (rl, s1, s2) = unscale(x);
    let mut cfg = template.clone();
    cfg.rho_l = rl;
    cfg.s1 = s1;
    cfg.s2 = s2;
    let mut r = [0.0; 3];
    let mut jac = [[0.0; 3]; 3];
    for (i, ch) in cfg.channels().iter().enumerate() {
        r[i] = imaging_residual(&channel_system_matrix(&cfg, ch), z[i]);
        // a = (1 - s1 rho)(1 - s2 rho_L) - s2 rho,  b = s1 + s2 (1 - rho_L s1)
        let rho = ch.power;
        let q = 1.0 - s1 * rho;
        let da = [-s2 * q, -rho + s2 * rl * rho, -rl * q - rho];
        let db = [-s2 * s1, 1.0 - s2 * rl, 1.0 - rl * s1];
        for k in 0..3 {
            jac[i][k] = (da[k] * z[i] + db[k]) * SCALE[k];
        }
    }
    (r, jac)
}

fn cost(r: &[f64; 3]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn max_abs(r: &[f64; 3]) -> f64 {
    r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Solve the 3x3 system `m x = v` by Gaussian elimination with partial
/// pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        v.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = v[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

fn seed_grid(budget: f64) -> Vec<[f64; 3]> {
    let mut seeds = Vec::with_capacity(36);
    for &rl in &RHO_L_SEEDS {
        for &s1 in &S1_SEEDS {
            for &s2 in &S2_SEEDS {
                let (mut s1, mut s2) = (s1, s2);
                if s1 + s2 > budget {
                    let f = 0.99 * budget / (s1 + s2);
                    s1 *= f;
                    s2 *= f;
                }
                seeds.push([rl / SCALE[0], s1 / SCALE[1], s2 / SCALE[2]]);
            }
        }
    }
    seeds
}

/// Levenberg iteration with identity damping in scaled coordinates. Steps
/// that leave the feasible box are rejected like steps that raise the cost.
fn levenberg(
    template: &OpticalSystemConfig,
    mut x: [f64; 3],
    z: [f64; 3],
    budget: f64,
) -> ([f64; 3], [f64; 3]) {
    let mut lambda = 1e-3;
    let (mut r, mut jac) = residuals(template, x, z);
    let mut c = cost(&r);
    for _ in 0..MAX_ITER {
        if max_abs(&r) < RESIDUAL_TOL * 1e-3 {
            break;
        }
        let mut h = [[0.0; 3]; 3];
        let mut g = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] = (0..3).map(|k| jac[k][i] * jac[k][j]).sum();
            }
            g[i] = -(0..3).map(|k| jac[k][i] * r[k]).sum::<f64>();
            h[i][i] += lambda;
        }
        let Some(dx) = solve3(h, g) else {
            lambda *= 2.0;
            continue;
        };
        let xn = [x[0] + dx[0], x[1] + dx[1], x[2] + dx[2]];
        if feasible(xn, budget) {
            let (rn, jn) = residuals(template, xn, z);
            let cn = cost(&rn);
            if cn < c {
                x = xn;
                r = rn;
                jac = jn;
                c = cn;
                lambda /= 3.0;
                continue;
            }
        }
        lambda *= 2.0;
        if lambda > 1e30 {
            break;
        }
    }
    (x, r)
}

fn solve_assignment(
    template: &OpticalSystemConfig,
    z: [f64; 3],
    budget: f64,
    assignment: Assignment,
) -> AssignmentOutcome {
    // converged runs rank by seed index, the rest by residual
    let mut best: Option<(bool, f64, usize, [f64; 3], [f64; 3])> = None;
    for (idx, seed) in seed_grid(budget).into_iter().enumerate() {
        let (x, r) = levenberg(template, seed, z, budget);
        let m = max_abs(&r);
        let conv = m < RESIDUAL_TOL && feasible(x, budget);
        let better = match &best {
            None => true,
            Some((bc, bm, ..)) => match (conv, *bc) {
                (true, false) => true,
                (false, true) | (true, true) => false,
                (false, false) => m < *bm,
            },
        };
        if better {
            best = Some((conv, m, idx, x, r));
        }
    }
    let (converged, max_residual, seed_index, x, residuals) = best.expect("non-empty seed grid");
    let (rl, s1, s2) = unscale(x);
    let mut config = template.clone();
    config.rho_l = rl;
    config.s1 = s1;
    config.s2 = s2;
    AssignmentOutcome {
        assignment,
        config,
        max_residual,
        residuals,
        converged,
        seed_index,
    }
}
