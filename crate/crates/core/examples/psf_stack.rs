//! Point-source PSFs of I1 and I3 from 12 to 20 mm: spot size per channel
//! from image second moments next to the predicted Gaussian sigma.

use nearfar::optics::{blur_radius, psf_sigma_px, reference_design};
use nearfar::raster::Raster;
use nearfar::render::{extract_subimages, render_capture, PlanarTarget, SensorSpec};

/// RMS width along x and y of a non-negative image.
fn second_moments(img: &Raster) -> (f64, f64) {
    let (mut s, mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = img.get(x, y).max(0.0);
            let (fx, fy) = (x as f64, y as f64);
            s += v;
            sx += v * fx;
            sy += v * fy;
            sxx += v * fx * fx;
            syy += v * fy * fy;
        }
    }
    let (mx, my) = (sx / s, sy / s);
    ((sxx / s - mx * mx).sqrt(), (syy / s - my * my).sqrt())
}

fn main() -> nearfar::Result<()> {
    let (cfg, _) = reference_design()?;
    let sensor = SensorSpec::matched(&cfg, 256)?;
    println!("depth_mm  ch  measured_x  measured_y  predicted_x  predicted_y  (px)");
    for k in 0..9 {
        let z = (12 + k) as f64 * 1e-3;
        let cap = render_capture(&[PlanarTarget::point(z, 1.0)], &cfg, &sensor, false, 0)?;
        let [i1, _, i3] = extract_subimages(&cap)?;
        for (ch, img) in [(1u8, &i1), (3u8, &i3)] {
            let (mx, my) = second_moments(img);
            let (rx, ry) = blur_radius(&cfg, &cfg.channel(ch), z)?;
            let (px, py) = psf_sigma_px((rx, ry), cfg.kappa, sensor.pixel_pitch);
            println!("{:8.1}  {ch}   {mx:10.3}  {my:10.3}  {px:11.3}  {py:11.3}", z * 1e3);
        }
    }
    Ok(())
}
