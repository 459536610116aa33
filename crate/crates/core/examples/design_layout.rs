//! Solve the lens power and spacings for the published focal planes.
//!
//! With the published side powers the three focal planes cannot all be
//! reached; the solver then reports the best residual. Passing
//! `--consistent` uses side powers derived from the targets instead.

use nearfar::optics::{
    channel_system_matrix, consistent_side_powers, shared_matrix, solve_layout_report,
    DEFAULT_TRACK_BUDGET, REFERENCE_TARGETS,
};

fn main() -> nearfar::Result<()> {
    let consistent = std::env::args().any(|a| a == "--consistent");
    let (rho_1, rho_3) = if consistent {
        consistent_side_powers(REFERENCE_TARGETS)
    } else {
        (20.0, 100.0)
    };
    println!("targets (m): {:?}", REFERENCE_TARGETS);
    println!("side powers: rho_1 = {rho_1:.4}, rho_3 = {rho_3:.4} m^-1");
    let report = solve_layout_report(REFERENCE_TARGETS, rho_1, rho_3, DEFAULT_TRACK_BUDGET)?;
    for (i, o) in report.outcomes.iter().enumerate() {
        let c = &o.config;
        println!(
            "{:?}{}: rho_L = {:.4} m^-1, s1 = {:.4} mm, s2 = {:.4} mm, max residual {:.3e} m, converged {}",
            o.assignment,
            if report.selected == Some(i) { " (selected)" } else { "" },
            c.rho_l,
            c.s1 * 1e3,
            c.s2 * 1e3,
            o.max_residual,
            o.converged
        );
    }
    if let Some(o) = report.selected_outcome() {
        let m = shared_matrix(&o.config);
        println!("shared matrix: a = {:.6}, b = {:.6e} m", m.a, m.b);
        for ch in o.config.channels() {
            let s = channel_system_matrix(&o.config, &ch);
            println!(
                "  channel {}: Z_f = {:.6} m, magnification {:.5}",
                ch.index,
                -s.b / s.a,
                s.a
            );
        }
    }
    Ok(())
}
