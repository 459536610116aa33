use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Shot plus read noise: each pixel becomes
/// `(Poisson(gain * v) + N(0, read_sigma^2)) / gain`.
///
/// Every pixel draws from its own ChaCha stream (stream id = pixel index),
/// so the result depends only on `seed` and the input values.
pub fn apply_noise(raster: &Raster, gain: f64, read_sigma: f64, seed: u64) -> Result<Raster> {
    if !(gain > 0.0) || !gain.is_finite() {
        return Err(Error::InvalidArgument(format!("gain must be positive, got {gain}")));
    }
    if !(read_sigma >= 0.0) || !read_sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "read noise sigma must be non-negative, got {read_sigma}"
        )));
    }
    let read = Normal::new(0.0, read_sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut out = raster.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        let mean = (*v * gain).max(0.0);
        if mean == 0.0 && read_sigma == 0.0 {
            *v = 0.0;
            continue;
        }
        let mut rng = base.clone();
        rng.set_stream(i as u64);
        let shot = if mean > 0.0 {
            Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(format!("Poisson mean {mean}: {e}")))?
                .sample(&mut rng)
        } else {
            0.0
        };
        let noise = if read_sigma > 0.0 {
            read.sample(&mut rng)
        } else {
            0.0
        };
        *v = (shot + noise) / gain;
    }
    Ok(out)
}

/// Child seed for sub-experiment `salt` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(salt);
    rng.random()
}
