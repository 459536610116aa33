//! Phase map of the right panel: continuous, wrapped and 8-level.
//!
//! `cargo run --example phase_profile -- [out.csv]`

use nearfar::metasurface::{
    export_phase_csv, focusing_deflection_phase, quantize_phase, PanelPhase, PhaseGrid,
    DEFAULT_LEVELS,
};
use nearfar::optics::reference_design;

fn main() -> nearfar::Result<()> {
    let (cfg, _) = reference_design()?;
    let ch = cfg.channel(3);
    let panel = PanelPhase::new(ch.power, ch.deflection, cfg.lambda)?;
    // a coarse grid keeps the file small; the fabrication pitch is 350 nm
    let grid = PhaseGrid::covering(cfg.panel_width, cfg.panel_height, 5e-6);
    let wrapped = focusing_deflection_phase(&panel, &grid)?;
    let levels = quantize_phase(&wrapped, DEFAULT_LEVELS)?;

    let (gx, gy) = panel.gradient(0.0, 0.0);
    let k = std::f64::consts::TAU / cfg.lambda;
    println!("panel power {:.3} m^-1, deflection {:.2} deg", ch.power, ch.deflection.to_degrees());
    println!("gradient at center ({gx:.4e}, {gy:.4e}) rad/m, k sin(theta) = {:.4e}", k * ch.deflection.sin());
    println!("grid {} x {} at {} m", grid.width, grid.height, grid.pitch);

    let row = grid.height / 2;
    print!("center row, first 12 samples (rad):");
    for col in 0..12 {
        print!(" {:.2}", levels.get(col, row));
    }
    println!();

    if let Some(path) = std::env::args().nth(1) {
        export_phase_csv(&levels, path.as_ref())?;
        println!("wrote {path}");
    }
    Ok(())
}
