use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nearfar::calibration::CalibrationResult;
use nearfar::harness::{self, ExperimentConfig, Panel};
use nearfar::Result;

#[derive(Parser)]
#[command(name = "nearfar", version, about = "Near-far multiplexed camera simulator and ranging pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON); the reference experiment when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the configuration's output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    noise: Option<Toggle>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum PanelArg {
    Left,
    Right,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the layout for the configured focal targets.
    Design {
        /// Replace the side powers by the ones consistent with the targets.
        #[arg(long)]
        derive_powers: bool,
    },
    /// Export a side panel's quantized phase profile.
    Phase {
        #[arg(long, value_enum, default_value = "right")]
        panel: PanelArg,
    },
    /// Render a scene file to a multiplexed capture.
    Render {
        #[arg(long)]
        scene: PathBuf,
    },
    /// Point-source captures at every configured depth.
    PsfStack,
    /// Fit the depth-equation constants to a PSF stack.
    Calibrate {
        #[arg(long)]
        stack: PathBuf,
    },
    /// Range one capture.
    Depth {
        #[arg(long)]
        capture: PathBuf,
        #[arg(long)]
        params: PathBuf,
    },
    /// Calibrate (unless --params is given) and evaluate over the depth sweep.
    Eval {
        #[arg(long)]
        params: Option<PathBuf>,
    },
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::reference()?,
    };
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(n) = c.noise {
        cfg.set_noise(matches!(n, Toggle::On));
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.common)?;
    let out: &Path = &cfg.output_dir;
    match cli.command {
        Command::Design { derive_powers } => {
            let report = harness::cmd_design(&cfg.design, derive_powers, out)?;
            for (i, o) in report.outcomes.iter().enumerate() {
                let mark = if report.selected == Some(i) { "*" } else { " " };
                println!(
                    "{mark} {:?}: rho_L = {:.4} m^-1, s1 = {:.4} mm, s2 = {:.4} mm, max residual {:.3e} m",
                    o.assignment,
                    o.config.rho_l,
                    o.config.s1 * 1e3,
                    o.config.s2 * 1e3,
                    o.max_residual
                );
            }
        }
        Command::Phase { panel } => {
            let panel = match panel {
                PanelArg::Left => Panel::Left,
                PanelArg::Right => Panel::Right,
            };
            let p = harness::cmd_phase(panel, &cfg, out)?;
            println!("{} x {} samples at {:e} m", p.width, p.height, p.pitch);
        }
        Command::Render { scene } => {
            let cap = harness::cmd_render(&scene, &cfg, out)?;
            for (i, w) in cap.layout().windows.iter().enumerate() {
                println!("I{}: {}x{} at ({}, {})", i + 1, w.width, w.height, w.x0, w.y0);
            }
        }
        Command::PsfStack => {
            let entries = harness::cmd_psf_stack(&cfg, out)?;
            println!("{} depths written to {}", entries.len(), out.display());
        }
        Command::Calibrate { stack } => {
            let r = harness::cmd_calibrate(&stack, &cfg.dfdd, out)?;
            println!(
                "A = {:.6} m^-1, B = {:.6} m^-1, rms {:.3e} m over {} samples (condition {:.3e})",
                r.a_param, r.b_param, r.rms_residual, r.n_used, r.condition
            );
        }
        Command::Depth { capture, params } => {
            let s = harness::cmd_depth(&capture, &params, &cfg.dfdd, out)?;
            println!(
                "depth {:.4} mm from {} pixels, shift ({:.3}, {:.3}) px",
                s.point_estimate_m * 1e3,
                s.n_valid,
                s.shift.0,
                s.shift.1
            );
        }
        Command::Eval { params } => {
            let params = params.map(|p| CalibrationResult::load(&p)).transpose()?;
            let report = harness::cmd_eval(&cfg, params, out)?;
            println!("true_mm  mean_mm  mae_mm  frac5  n_valid");
            for r in &report.rows {
                println!(
                    "{:7.2}  {:7.3}  {:6.3}  {:5.3}  {:7}",
                    r.true_depth_mm, r.mean_pred_mm, r.mae_mm, r.frac_within_5pct, r.n_valid
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
