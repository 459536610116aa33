use crate::error::{Error, Result};
use crate::raster::Raster;

/// Gaussian sigma below this fraction of a pixel collapses to a delta.
const DELTA_FRACTION: f64 = 0.25;

/// Per-axis Gaussian sigma in pixels for blur radii `r` (metres):
/// `sigma = kappa * r / pixel_pitch`, zero when below a quarter pixel.
pub fn psf_sigma_px(r: (f64, f64), kappa: f64, pixel_pitch: f64) -> (f64, f64) {
    let f = |r: f64| {
        let s = kappa * r / pixel_pitch;
        if s < DELTA_FRACTION {
            0.0
        } else {
            s
        }
    };
    (f(r.0), f(r.1))
}

/// Samples of a unit-sum 1D Gaussian centered at `center` over the integer
/// positions `lo..=hi`. A zero sigma puts all weight on the nearest sample.
pub fn gaussian_samples(sigma: f64, center: f64, lo: i64, hi: i64) -> Vec<f64> {
    let n = (hi - lo + 1).max(0) as usize;
    let mut w = vec![0.0; n];
    if n == 0 {
        return w;
    }
    if sigma <= 0.0 {
        let k = center.round() as i64;
        if (lo..=hi).contains(&k) {
            w[(k - lo) as usize] = 1.0;
        }
        return w;
    }
    let inv = 0.5 / (sigma * sigma);
    for (i, v) in w.iter_mut().enumerate() {
        let d = (lo + i as i64) as f64 - center;
        *v = (-d * d * inv).exp();
    }
    let s = crate::numeric::pairwise_sum(&w);
    if s > 0.0 {
        w.iter_mut().for_each(|v| *v /= s);
    }
    w
}

/// Half-width used when a PSF is applied by convolution.
pub fn kernel_half_width(sigma: f64) -> usize {
    if sigma <= 0.0 {
        0
    } else {
        (5.0 * sigma).ceil() as usize
    }
}

/// Centered odd-length 1D kernel, truncated at `ceil(5 sigma)`.
pub fn psf_kernel_1d(sigma: f64) -> Vec<f64> {
    let h = kernel_half_width(sigma) as i64;
    gaussian_samples(sigma, 0.0, -h, h)
}

/// Anisotropic Gaussian PSF on a `support x support` pixel grid with
/// `sigma = kappa * r`, normalized to unit sum.
pub fn gaussian_psf(
    r_x: f64,
    r_y: f64,
    kappa: f64,
    pixel_pitch: f64,
    support: usize,
) -> Result<Raster> {
    if support.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "PSF support must be odd, got {support}"
        )));
    }
    if !(pixel_pitch > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pixel pitch must be positive, got {pixel_pitch}"
        )));
    }
    let (sx, sy) = psf_sigma_px((r_x, r_y), kappa, pixel_pitch);
    let h = (support / 2) as i64;
    let kx = gaussian_samples(sx, 0.0, -h, h);
    let ky = gaussian_samples(sy, 0.0, -h, h);
    Ok(Raster::from_fn(support, support, |x, y| kx[x] * ky[y]))
}
