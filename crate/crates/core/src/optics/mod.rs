//! Paraxial model of the two-layer hybrid system.

pub mod config;
pub mod focus;
pub mod layout;
pub mod matrix;
pub mod psf;

pub use config::{ChannelSpec, OpticalSystemConfig, DEFAULT_TRACK_BUDGET};
pub use focus::{
    blur_radius, channel_system_matrix, chief_ray_position, focal_object_distance,
    imaging_residual, limiting_apertures, magnification, shared_matrix,
};
pub use layout::{
    consistent_side_powers, reference_design, solve_layout, solve_layout_report, Assignment,
    FocalSolution, LayoutReport, REFERENCE_TARGETS,
};
pub use matrix::RayTransferMatrix;
pub use psf::{gaussian_psf, psf_sigma_px};
