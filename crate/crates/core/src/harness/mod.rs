//! Experiment configuration, commands and artifact writers behind the CLI.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod pipeline;
pub mod svg;

pub use commands::{
    cmd_calibrate, cmd_depth, cmd_design, cmd_eval, cmd_phase, cmd_psf_stack, cmd_render,
    DepthSummary, EvalReport, Panel,
};
pub use config::{DesignSpec, ExperimentConfig, NoiseSpec, PhaseSpec};
