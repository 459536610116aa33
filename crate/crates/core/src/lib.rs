//! Simulation of a three-channel metasurface/refractive near-far camera and
//! closed-form depth from differential defocus.

// `!(x > 0.0)` is the NaN-rejecting form of these checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod dfdd;
pub mod error;
pub mod harness;
pub mod metasurface;
pub mod numeric;
pub mod optics;
pub mod pnm;
pub mod raster;
pub mod render;

pub use error::{Error, Result};
