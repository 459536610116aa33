//! Depth from differential defocus: alignment of the close-range pair,
//! differential images, closed-form depth and aggregation.

pub mod aggregate;
pub mod align;
pub mod depth;
pub mod differential;

use serde::{Deserialize, Serialize};

pub use aggregate::{aggregate_depth, eval_metrics, DepthAggregate, Histogram, MetricsRow};
pub use align::{align_pair, align_smoothed, AlignedPair};
pub use depth::{depth_from_defocus, DepthMap, DfddParams, Thresholds};
pub use differential::{differential_pair, laplacian, laplacian_weighted, DifferentialPair};

/// Tunables of the inverse pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DfddConfig {
    /// Gaussian pre-smoothing applied to both images, pixels.
    pub sigma_pre_x: f64,
    pub sigma_pre_y: f64,
    /// Weight of the y term in the Laplacian stencil.
    pub aspect_weight: f64,
    /// Gates are `gate_fraction` times this quantile of |lap|.
    pub gate_quantile: f64,
    pub gate_fraction: f64,
    /// Metres.
    pub z_max: f64,
    /// Pixels.
    pub max_shift: f64,
    /// Histogram bin width, metres.
    pub bin_width: f64,
}

impl Default for DfddConfig {
    fn default() -> Self {
        Self {
            sigma_pre_x: 1.0,
            sigma_pre_y: 1.0,
            aspect_weight: 1.0,
            gate_quantile: 0.99,
            gate_fraction: 1e-3,
            z_max: 0.1,
            max_shift: align::DEFAULT_MAX_SHIFT,
            bin_width: aggregate::DEFAULT_BIN_WIDTH,
        }
    }
}

impl DfddConfig {
    /// Settings for point-source ranging with the 1:2 aperture aspect:
    /// heavy smoothing stretched along y, a y-weighted stencil matching the
    /// fourfold blur variance along y, gating at two fifths of the strongest
    /// Laplacian response, and room for the parallax between I1 and I3.
    pub fn point_ranging(aspect: f64) -> Self {
        Self {
            sigma_pre_x: 6.0,
            sigma_pre_y: 6.0 * aspect,
            aspect_weight: aspect * aspect,
            gate_quantile: 1.0,
            gate_fraction: 0.4,
            z_max: 0.1,
            max_shift: 160.0,
            bin_width: aggregate::DEFAULT_BIN_WIDTH,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.sigma_pre_x >= 0.0
            && self.sigma_pre_y >= 0.0
            && self.aspect_weight > 0.0
            && (0.0..=1.0).contains(&self.gate_quantile)
            && self.gate_fraction >= 0.0
            && self.z_max > 0.0
            && self.max_shift > 0.0
            && self.bin_width > 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidConfig(format!("invalid dfdd settings {self:?}")))
        }
    }
}
