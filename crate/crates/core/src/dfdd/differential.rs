//! Spatial Laplacian and dioptric half-difference of an aligned pair.

use super::align::AlignedPair;
use super::DfddConfig;
use crate::error::{Error, Result};
use crate::raster::{gaussian_kernel_1d, Mask, Raster};

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialPair {
    /// Laplacian of the mean image, intensity per px².
    pub lap: Raster,
    /// Half-difference `(I3 - I1) / 2`.
    pub drho: Raster,
    pub valid: Mask,
}

/// Five-point Laplacian after optional isotropic Gaussian smoothing. The
/// one-pixel border is left at zero.
pub fn laplacian(img: &Raster, sigma_pre: f64) -> Result<Raster> {
    let k = gaussian_kernel_1d(sigma_pre);
    let smooth = img.convolve_separable(&k, &k);
    laplacian_weighted(&smooth, 1.0)
}

/// Stencil `[[0, w, 0], [1, -2 - 2w, 1], [0, w, 0]]`: the y term weighted
/// by `w`. With `w = 1` this is the five-point Laplacian.
pub fn laplacian_weighted(img: &Raster, w: f64) -> Result<Raster> {
    let (nx, ny) = (img.width(), img.height());
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidArgument(format!(
            "Laplacian needs at least 3x3 pixels, got {nx}x{ny}"
        )));
    }
    let mut out = Raster::zeros(nx, ny);
    let c = -2.0 - 2.0 * w;
    for y in 1..ny - 1 {
        for x in 1..nx - 1 {
            let v = img.get(x - 1, y)
                + img.get(x + 1, y)
                + w * (img.get(x, y - 1) + img.get(x, y + 1))
                + c * img.get(x, y);
            out.set(x, y, v);
        }
    }
    Ok(out)
}

/// Smooth both images identically, then form `lap = L(I1 + I3) / 2` and
/// `drho = (I3 - I1) / 2`.
pub fn differential_pair(p: &AlignedPair, cfg: &DfddConfig) -> Result<DifferentialPair> {
    if !p.i1.same_shape(&p.i3) {
        return Err(Error::InvalidArgument("aligned images differ in size".into()));
    }
    let kx = gaussian_kernel_1d(cfg.sigma_pre_x);
    let ky = gaussian_kernel_1d(cfg.sigma_pre_y);
    let s1 = p.i1.convolve_separable(&kx, &ky);
    let s3 = p.i3.convolve_separable(&kx, &ky);
    let sum = s1.zip_with(&s3, |a, b| a + b)?;
    let lap = laplacian_weighted(&sum, cfg.aspect_weight)?.scale(0.5);
    let drho = s3.zip_with(&s1, |a, b| 0.5 * (a - b))?;
    let mut valid = p.valid.clone();
    valid.clear_border(1);
    Ok(DifferentialPair { lap, drho, valid })
}
