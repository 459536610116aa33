//! Translation registration of I3 onto I1 by phase correlation.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::DfddConfig;
use crate::error::{Error, Result};
use crate::raster::{gaussian_kernel_1d, Mask, Raster};

/// Default bound on the recovered shift, pixels.
pub const DEFAULT_MAX_SHIFT: f64 = 64.0;
/// Width of the correlation peak imposed by the spectral weighting, pixels.
const PEAK_SIGMA: f64 = 2.0;
/// Regularization of the cross-power normalization, relative to its peak.
const CROSS_POWER_EPS: f64 = 0.05;
/// Peak-to-mean ratio below which the peak is not trusted.
const RELIABILITY_RATIO: f64 = 3.0;
const TUKEY_ALPHA: f64 = 0.25;

/// I1 and I3 on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub i1: Raster,
    pub i3: Raster,
    /// `(dx, dy)` such that `i3(x, y)` matched `i1(x - dx, y - dy)` before
    /// resampling.
    pub shift: (f64, f64),
    /// False where the resampled I3 drew on samples outside its frame.
    pub valid: Mask,
}

impl AlignedPair {
    /// Pair already on a common grid.
    pub fn identity(i1: Raster, i3: Raster) -> Result<Self> {
        if !i1.same_shape(&i3) {
            return Err(Error::InvalidArgument("I1 and I3 differ in size".into()));
        }
        let valid = Mask::filled(i1.width(), i1.height(), true);
        Ok(Self {
            i1,
            i3,
            shift: (0.0, 0.0),
            valid,
        })
    }
}

fn tukey(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![1.0; n];
    }
    let edge = TUKEY_ALPHA * (n - 1) as f64 / 2.0;
    (0..n)
        .map(|i| {
            let t = i as f64;
            let d = t.min((n - 1) as f64 - t);
            if d >= edge {
                1.0
            } else {
                0.5 * (1.0 - (std::f64::consts::PI * d / edge).cos())
            }
        })
        .collect()
}

struct Fft2 {
    w: usize,
    h: usize,
    row: std::sync::Arc<dyn rustfft::Fft<f64>>,
    col: std::sync::Arc<dyn rustfft::Fft<f64>>,
}

impl Fft2 {
    fn new(w: usize, h: usize, inverse: bool) -> Self {
        let mut planner = FftPlanner::new();
        let (row, col) = if inverse {
            (planner.plan_fft_inverse(w), planner.plan_fft_inverse(h))
        } else {
            (planner.plan_fft_forward(w), planner.plan_fft_forward(h))
        };
        Self { w, h, row, col }
    }

    fn run(&self, data: &mut [Complex64]) {
        for r in data.chunks_exact_mut(self.w) {
            self.row.process(r);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); self.h];
        for x in 0..self.w {
            for y in 0..self.h {
                column[y] = data[y * self.w + x];
            }
            self.col.process(&mut column);
            for y in 0..self.h {
                data[y * self.w + x] = column[y];
            }
        }
    }
}

fn spectrum(img: &Raster, wx: &[f64], wy: &[f64], fft: &Fft2) -> Vec<Complex64> {
    let mean = img.mean();
    let mut buf: Vec<Complex64> = (0..img.height())
        .flat_map(|y| {
            (0..img.width()).map(move |x| Complex64::new((img.get(x, y) - mean) * wx[x] * wy[y], 0.0))
        })
        .collect();
    fft.run(&mut buf);
    buf
}

/// Signed frequency (cycles per sample) of FFT bin `k` out of `n`.
fn freq(k: usize, n: usize) -> f64 {
    let k = if k > n / 2 { k as f64 - n as f64 } else { k as f64 };
    k / n as f64
}

/// Sub-sample offset of a peak from three samples, fitting a parabola to
/// their logarithms (exact for a Gaussian peak). Falls back to a plain
/// parabola when a neighbour is not positive.
fn refine(left: f64, center: f64, right: f64) -> f64 {
    let (l, c, r) = if left > 0.0 && center > 0.0 && right > 0.0 {
        (left.ln(), center.ln(), right.ln())
    } else {
        (left, center, right)
    };
    let den = l - 2.0 * c + r;
    if den >= 0.0 {
        return 0.0;
    }
    (0.5 * (l - r) / den).clamp(-0.5, 0.5)
}

/// Estimate the translation of `i3` relative to `i1` and resample `i3`
/// onto `i1`'s grid.
///
/// The correlation surface is the inverse transform of the regularized,
/// Gaussian-weighted cross-power spectrum of the Tukey-windowed images, so
/// the peak has a Gaussian profile and refines well with [`refine`].
pub fn align_pair(i1: &Raster, i3: &Raster, max_shift: f64) -> Result<AlignedPair> {
    if !i1.same_shape(i3) {
        return Err(Error::InvalidArgument(format!(
            "I1 is {}x{} but I3 is {}x{}",
            i1.width(),
            i1.height(),
            i3.width(),
            i3.height()
        )));
    }
    let (w, h) = (i1.width(), i1.height());
    if w < 4 || h < 4 {
        return Err(Error::InvalidArgument("images too small to align".into()));
    }
    reject_flat(i1, i3)?;
    let coarse = Correlation::new(i1, i3);
    let reach_x = (max_shift.floor() as usize).min(w / 2 - 1) as i64;
    let reach_y = (max_shift.floor() as usize).min(h / 2 - 1) as i64;
    let (bx, by, peak) = coarse.argmax(reach_x, reach_y);
    let floor = coarse.mean_abs();
    if !(peak > RELIABILITY_RATIO * floor) {
        return Err(Error::AlignmentUnreliable(format!(
            "correlation peak {peak:.3e} is below {RELIABILITY_RATIO} x mean level {floor:.3e}"
        )));
    }
    // refine on the overlap, where the residual shift is below a pixel and
    // the window no longer cuts through mismatched content
    let (ox, oy) = ((bx.max(0)) as usize, (by.max(0)) as usize);
    let (ax, ay) = ((-bx).max(0) as usize, (-by).max(0) as usize);
    let cw = w - bx.unsigned_abs() as usize;
    let chh = h - by.unsigned_abs() as usize;
    let (fx, fy) = if cw >= 4 && chh >= 4 {
        let c1 = i1.crop(ax, ay, cw, chh)?;
        let c3 = i3.crop(ox, oy, cw, chh)?;
        let fine = Correlation::new(&c1, &c3);
        let (dx, dy, v) = fine.argmax(1, 1);
        (
            dx as f64 + refine(fine.at(dx - 1, dy), v, fine.at(dx + 1, dy)),
            dy as f64 + refine(fine.at(dx, dy - 1), v, fine.at(dx, dy + 1)),
        )
    } else {
        (
            refine(coarse.at(bx - 1, by), peak, coarse.at(bx + 1, by)),
            refine(coarse.at(bx, by - 1), peak, coarse.at(bx, by + 1)),
        )
    };
    let (sx, sy) = (bx as f64 + fx, by as f64 + fy);
    if sx.abs() > max_shift || sy.abs() > max_shift {
        return Err(Error::AlignmentUnreliable(format!(
            "shift ({sx:.2}, {sy:.2}) exceeds the {max_shift} px bound"
        )));
    }
    Ok(resample_shifted(i1, i3, (sx, sy)))
}

fn reject_flat(i1: &Raster, i3: &Raster) -> Result<()> {
    let flat = |r: &Raster| {
        let d = r.data();
        d.iter().all(|&v| v == d[0])
    };
    if flat(i1) || flat(i3) {
        return Err(Error::AlignmentUnreliable("an input image is constant".into()));
    }
    Ok(())
}

/// [`align_pair`] with the shift estimated on copies smoothed by the
/// differential stage's pre-filter, then applied to the unsmoothed I3.
///
/// Smoothing acts as a matched filter when one image is much sharper than
/// the other: phase correlation would otherwise give the blurred image's
/// noise-only high frequencies as much weight as its signal.
pub fn align_smoothed(i1: &Raster, i3: &Raster, cfg: &DfddConfig) -> Result<AlignedPair> {
    // zero-padded smoothing would turn a flat frame into an edge roll-off
    reject_flat(i1, i3)?;
    let kx = gaussian_kernel_1d(cfg.sigma_pre_x);
    let ky = gaussian_kernel_1d(cfg.sigma_pre_y);
    let probe = align_pair(
        &i1.convolve_separable(&kx, &ky),
        &i3.convolve_separable(&kx, &ky),
        cfg.max_shift,
    )?;
    Ok(resample_shifted(i1, i3, probe.shift))
}

/// Circular correlation surface of two equally sized images.
struct Correlation {
    w: usize,
    h: usize,
    values: Vec<f64>,
}

impl Correlation {
    fn new(a: &Raster, b: &Raster) -> Self {
        let (w, h) = (a.width(), a.height());
        let wx = tukey(w);
        let wy = tukey(h);
        let fwd = Fft2::new(w, h, false);
        let fa = spectrum(a, &wx, &wy, &fwd);
        let fb = spectrum(b, &wx, &wy, &fwd);
        let mut cross: Vec<Complex64> = fb.iter().zip(&fa).map(|(p, q)| p * q.conj()).collect();
        let peak_mag = cross.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let eps = CROSS_POWER_EPS * peak_mag;
        let g = 2.0 * std::f64::consts::PI.powi(2) * PEAK_SIGMA * PEAK_SIGMA;
        for y in 0..h {
            let fy = freq(y, h);
            for x in 0..w {
                let fx = freq(x, w);
                let c = &mut cross[y * w + x];
                let weight = (-g * (fx * fx + fy * fy)).exp();
                *c = if eps > 0.0 {
                    *c * (weight / (c.norm() + eps))
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
        }
        Fft2::new(w, h, true).run(&mut cross);
        Self {
            w,
            h,
            values: cross.iter().map(|c| c.re).collect(),
        }
    }

    fn at(&self, dx: i64, dy: i64) -> f64 {
        let x = dx.rem_euclid(self.w as i64) as usize;
        let y = dy.rem_euclid(self.h as i64) as usize;
        self.values[y * self.w + x]
    }

    /// Largest value over shifts within the reach; the first in scan order
    /// wins ties.
    fn argmax(&self, reach_x: i64, reach_y: i64) -> (i64, i64, f64) {
        let mut best = (0i64, 0i64, f64::NEG_INFINITY);
        for dy in -reach_y..=reach_y {
            for dx in -reach_x..=reach_x {
                let v = self.at(dx, dy);
                if v > best.2 {
                    best = (dx, dy, v);
                }
            }
        }
        best
    }

    fn mean_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }
}

/// Pair `i1` with `i3` sampled at `(x + dx, y + dy)`.
pub fn resample_shifted(i1: &Raster, i3: &Raster, shift: (f64, f64)) -> AlignedPair {
    let (w, h) = (i1.width(), i1.height());
    let (sx, sy) = shift;
    let mut out = Raster::zeros(w, h);
    let mut valid = Mask::filled(w, h, true);
    for y in 0..h {
        let v = y as f64 + sy;
        let y_ok = v >= 0.0 && v <= (h - 1) as f64;
        for x in 0..w {
            let u = x as f64 + sx;
            out.set(x, y, i3.sample_bilinear(u, v));
            if !(y_ok && u >= 0.0 && u <= (w - 1) as f64) {
                valid.set(x, y, false);
            }
        }
    }
    AlignedPair {
        i1: i1.clone(),
        i3: out,
        shift,
        valid,
    }
}
