//! Dense row-major 2D rasters and the separable filters shared by the
//! forward renderer and the inverse pipeline.

use crate::error::{Error, Result};

/// A row-major grid of `f64` samples. Row 0 is the top row.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "raster data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Build a raster by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_shape(&self, other: &Raster) -> bool {
        self.width == other.width && self.height == other.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn add_at(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] += v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn sum(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.data)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.sum() / self.data.len() as f64
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Raster {
        self.map(|v| v * s)
    }

    /// Element-wise combination of two equally sized rasters.
    pub fn zip_with(&self, other: &Raster, f: impl Fn(f64, f64) -> f64) -> Result<Raster> {
        if !self.same_shape(other) {
            return Err(Error::InvalidArgument(format!(
                "raster shapes differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(Raster {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Copy out the rectangle `[x0, x0+w) x [y0, y0+h)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Raster> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::InvalidArgument(format!(
                "crop {}x{}+{}+{} exceeds {}x{} raster",
                w, h, x0, y0, self.width, self.height
            )));
        }
        let mut out = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let row = y * self.width;
            out.extend_from_slice(&self.data[row + x0..row + x0 + w]);
        }
        Ok(Raster {
            width: w,
            height: h,
            data: out,
        })
    }

    /// Bilinear sample at continuous pixel coordinates (pixel centers at
    /// integers). Outside the raster the value is zero.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        if !(x.is_finite() && y.is_finite()) {
            return 0.0;
        }
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        let mut acc = 0.0;
        for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
            if wy == 0.0 {
                continue;
            }
            for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
                if wx == 0.0 {
                    continue;
                }
                let (xi, yi) = (x0 + dx, y0 + dy);
                if xi >= 0 && yi >= 0 && (xi as usize) < self.width && (yi as usize) < self.height {
                    acc += wx * wy * self.get(xi as usize, yi as usize);
                }
            }
        }
        acc
    }

    /// Separable convolution with symmetric odd-length kernels along x then
    /// y. Samples outside the raster are treated as zero.
    pub fn convolve_separable(&self, kx: &[f64], ky: &[f64]) -> Raster {
        let tmp = convolve_rows(self, kx);
        convolve_cols(&tmp, ky)
    }
}

fn convolve_rows(src: &Raster, k: &[f64]) -> Raster {
    if k.len() == 1 {
        return src.scale(k[0]);
    }
    let half = (k.len() / 2) as i64;
    let w = src.width as i64;
    let mut out = Raster::zeros(src.width, src.height);
    for y in 0..src.height {
        let row = &src.data[y * src.width..(y + 1) * src.width];
        let orow = &mut out.data[y * src.width..(y + 1) * src.width];
        for (x, o) in orow.iter_mut().enumerate() {
            let x = x as i64;
            let lo = (x - half).max(0);
            let hi = (x + half).min(w - 1);
            let mut acc = 0.0;
            for xi in lo..=hi {
                acc += k[(xi - x + half) as usize] * row[xi as usize];
            }
            *o = acc;
        }
    }
    out
}

fn convolve_cols(src: &Raster, k: &[f64]) -> Raster {
    if k.len() == 1 {
        return src.scale(k[0]);
    }
    let half = (k.len() / 2) as i64;
    let h = src.height as i64;
    let w = src.width;
    let mut out = Raster::zeros(src.width, src.height);
    for y in 0..src.height as i64 {
        let lo = (y - half).max(0);
        let hi = (y + half).min(h - 1);
        let orow = &mut out.data[y as usize * w..(y as usize + 1) * w];
        for yi in lo..=hi {
            let kv = k[(yi - y + half) as usize];
            let srow = &src.data[yi as usize * w..(yi as usize + 1) * w];
            for (o, &s) in orow.iter_mut().zip(srow) {
                *o += kv * s;
            }
        }
    }
    out
}

/// Normalized 1D Gaussian sampled at integer offsets, truncated at
/// `ceil(4 sigma)`. A non-positive sigma gives the unit impulse.
pub fn gaussian_kernel_1d(sigma_px: f64) -> Vec<f64> {
    if !(sigma_px > 0.0) {
        return vec![1.0];
    }
    let half = (4.0 * sigma_px).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let d = i as f64 - half as f64;
            (-0.5 * d * d / (sigma_px * sigma_px)).exp()
        })
        .collect();
    let s: f64 = crate::numeric::pairwise_sum(&k);
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Per-pixel validity flags matching a raster's shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    /// Clear a border of `n` pixels on every side.
    pub fn clear_border(&mut self, n: usize) {
        for y in 0..self.height {
            for x in 0..self.width {
                if x < n || y < n || x + n >= self.width || y + n >= self.height {
                    self.data[y * self.width + x] = false;
                }
            }
        }
    }

    pub fn and(&self, other: &Mask) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a && b)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_extracts_expected_block() {
        let r = Raster::from_fn(4, 3, |x, y| (10 * y + x) as f64);
        let c = r.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.data(), &[11.0, 12.0, 21.0, 22.0]);
        assert!(r.crop(3, 0, 2, 1).is_err());
    }

    #[test]
    fn bilinear_hits_pixel_centers_exactly() {
        let r = Raster::from_fn(3, 3, |x, y| (x + 3 * y) as f64);
        assert_eq!(r.sample_bilinear(1.0, 2.0), 7.0);
        assert!((r.sample_bilinear(0.5, 0.0) - 0.5).abs() < 1e-15);
        assert_eq!(r.sample_bilinear(-2.0, 0.0), 0.0);
    }

    #[test]
    fn separable_convolution_preserves_interior_mass() {
        let mut r = Raster::zeros(41, 41);
        r.set(20, 20, 3.0);
        let k = gaussian_kernel_1d(2.0);
        let out = r.convolve_separable(&k, &k);
        assert!((out.sum() - 3.0).abs() < 1e-12);
        assert!((out.get(18, 20) - out.get(22, 20)).abs() < 1e-15);
    }

    #[test]
    fn gaussian_kernel_degenerates_to_impulse() {
        assert_eq!(gaussian_kernel_1d(0.0), vec![1.0]);
        let k = gaussian_kernel_1d(1.5);
        assert_eq!(k.len(), 2 * 6 + 1);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
