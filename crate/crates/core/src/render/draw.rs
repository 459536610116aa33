//! Forward model of one sub-image.

use super::geometry::{subimage_geometry, Window};
use super::scene::{PlanarTarget, Texture};
use super::sensor::SensorSpec;
use crate::error::Result;
use crate::optics::psf::{gaussian_samples, kernel_half_width, psf_kernel_1d};
use crate::optics::{
    blur_radius, chief_ray_position, magnification, psf_sigma_px, ChannelSpec, OpticalSystemConfig,
};
use crate::raster::Raster;

/// Where one target lands in a channel: sensor-pixel position of the target
/// center, pixels per object metre (signed), and PSF sigmas in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetProjection {
    pub center_px: (f64, f64),
    pub scale: f64,
    pub sigma_px: (f64, f64),
}

pub fn project_target(
    cfg: &OpticalSystemConfig,
    ch: &ChannelSpec,
    sensor: &SensorSpec,
    target: &PlanarTarget,
) -> Result<TargetProjection> {
    let z = target.depth;
    let (x, y) = chief_ray_position(cfg, ch, target.center, z)?;
    let r = blur_radius(cfg, ch, z)?;
    Ok(TargetProjection {
        center_px: sensor.to_pixel(x, y),
        scale: magnification(cfg, ch, z)? / sensor.pixel_pitch,
        sigma_px: psf_sigma_px(r, cfg.kappa, sensor.pixel_pitch),
    })
}

/// Render one channel's sub-image as a window-sized raster.
///
/// Targets are composited far to near. Each is resampled bilinearly into
/// the window, blurred by its depth's PSF together with its coverage, and
/// laid over what is behind it. Point sources are splatted directly as
/// sampled Gaussians and do not occlude.
pub fn render_subimage(
    scene: &[PlanarTarget],
    cfg: &OpticalSystemConfig,
    ch: &ChannelSpec,
    sensor: &SensorSpec,
) -> Result<Raster> {
    let window = subimage_geometry(cfg, ch, sensor)?.window;
    let mut out = Raster::zeros(window.width, window.height);
    let mut order: Vec<&PlanarTarget> = scene.iter().collect();
    order.sort_by(|a, b| b.depth.total_cmp(&a.depth));
    for target in order {
        target.validate()?;
        let proj = project_target(cfg, ch, sensor, target)?;
        match &target.texture {
            Texture::Point { radiance } => splat_point(&mut out, &window, &proj, *radiance),
            Texture::Raster(tex) => {
                let (color, cover) = resample(tex, target, &proj, &window);
                let kx = psf_kernel_1d(proj.sigma_px.0);
                let ky = psf_kernel_1d(proj.sigma_px.1);
                let color = color.convolve_separable(&kx, &ky);
                let cover = cover.convolve_separable(&kx, &ky);
                for ((o, c), a) in out
                    .data_mut()
                    .iter_mut()
                    .zip(color.data())
                    .zip(cover.data())
                {
                    *o = *o * (1.0 - a) + c;
                }
            }
        }
    }
    Ok(out)
}

fn splat_point(out: &mut Raster, window: &Window, proj: &TargetProjection, radiance: f64) {
    let cx = proj.center_px.0 - window.x0 as f64;
    let cy = proj.center_px.1 - window.y0 as f64;
    let span = |c: f64, sigma: f64, len: usize| {
        let h = kernel_half_width(sigma) as i64;
        let mid = c.round() as i64;
        let lo = (mid - h).max(0);
        let hi = (mid + h).min(len as i64 - 1);
        (lo, hi)
    };
    let (x_lo, x_hi) = span(cx, proj.sigma_px.0, window.width);
    let (y_lo, y_hi) = span(cy, proj.sigma_px.1, window.height);
    if x_lo > x_hi || y_lo > y_hi {
        return;
    }
    // normalize over the untruncated support so clipping loses energy
    let hx = kernel_half_width(proj.sigma_px.0) as i64;
    let hy = kernel_half_width(proj.sigma_px.1) as i64;
    let (mx, my) = (cx.round() as i64, cy.round() as i64);
    let wx = gaussian_samples(proj.sigma_px.0, cx, mx - hx, mx + hx);
    let wy = gaussian_samples(proj.sigma_px.1, cy, my - hy, my + hy);
    for y in y_lo..=y_hi {
        let fy = wy[(y - (my - hy)) as usize] * radiance;
        if fy == 0.0 {
            continue;
        }
        for x in x_lo..=x_hi {
            out.add_at(x as usize, y as usize, fy * wx[(x - (mx - hx)) as usize]);
        }
    }
}

/// Premultiplied radiance and coverage of a textured target on the window
/// grid, before blurring.
fn resample(
    tex: &Raster,
    target: &PlanarTarget,
    proj: &TargetProjection,
    window: &Window,
) -> (Raster, Raster) {
    let alpha = target.opacity.alpha();
    let tw = tex.width() as f64;
    let th = tex.height() as f64;
    // pixel offset from the target center -> texel offset: one texel spans
    // |scale| * pitch pixels, and the negative magnification flips both axes
    // back to upright under the rotated readout.
    let texels_per_px = 1.0 / (proj.scale * target.physical_pitch);
    let mut color = Raster::zeros(window.width, window.height);
    let mut cover = Raster::zeros(window.width, window.height);
    for j in 0..window.height {
        let dy = (window.y0 + j) as f64 - proj.center_px.1;
        let v = -dy * texels_per_px + 0.5 * (th - 1.0);
        if v <= -1.0 || v >= th {
            continue;
        }
        for i in 0..window.width {
            let dx = (window.x0 + i) as f64 - proj.center_px.0;
            let u = -dx * texels_per_px + 0.5 * (tw - 1.0);
            if u <= -1.0 || u >= tw {
                continue;
            }
            let (val, cov) = sample_with_coverage(tex, u, v);
            color.set(i, j, alpha * val);
            cover.set(i, j, alpha * cov);
        }
    }
    (color, cover)
}

/// Bilinear sample and the fraction of the bilinear footprint inside the
/// texture.
fn sample_with_coverage(tex: &Raster, u: f64, v: f64) -> (f64, f64) {
    let x0 = u.floor();
    let y0 = v.floor();
    let fx = u - x0;
    let fy = v - y0;
    let (x0, y0) = (x0 as i64, y0 as i64);
    let mut val = 0.0;
    let mut cov = 0.0;
    for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
        for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
            let (xi, yi) = (x0 + dx, y0 + dy);
            let w = wx * wy;
            if w > 0.0
                && xi >= 0
                && yi >= 0
                && (xi as usize) < tex.width()
                && (yi as usize) < tex.height()
            {
                val += w * tex.get(xi as usize, yi as usize);
                cov += w;
            }
        }
    }
    (val, cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{channel_system_matrix, focal_object_distance, gaussian_psf, reference_design};
    use crate::render::scene::{checker, Opacity};

    fn setup() -> (OpticalSystemConfig, SensorSpec) {
        let (cfg, _) = reference_design().unwrap();
        let sensor = SensorSpec::matched(&cfg, 128).unwrap();
        (cfg, sensor)
    }

    #[test]
    fn in_focus_point_is_one_pixel() {
        let (cfg, sensor) = setup();
        let ch = cfg.channel(1);
        let zf = focal_object_distance(&channel_system_matrix(&cfg, &ch)).unwrap();
        let img = render_subimage(&[PlanarTarget::point(zf, 5.0)], &cfg, &ch, &sensor).unwrap();
        let g = subimage_geometry(&cfg, &ch, &sensor).unwrap();
        let (cx, cy) = (
            g.center_px.0.round() as usize - g.window.x0,
            g.center_px.1.round() as usize - g.window.y0,
        );
        assert_eq!(img.get(cx, cy), 5.0);
        assert_eq!(img.sum(), 5.0);
    }

    #[test]
    fn defocused_point_matches_psf() {
        let (cfg, sensor) = setup();
        let ch = cfg.channel(3);
        let z = 0.016;
        // shift the point laterally so its chief ray hits a pixel center
        let probe = project_target(&cfg, &ch, &sensor, &PlanarTarget::point(z, 1.0)).unwrap();
        let offset_px = probe.center_px.0.round() - probe.center_px.0;
        let mut t = PlanarTarget::point(z, 1.0);
        t.center.0 = -offset_px / probe.scale;
        let proj = project_target(&cfg, &ch, &sensor, &t).unwrap();
        assert!((proj.center_px.0 - proj.center_px.0.round()).abs() < 1e-9);
        assert!((proj.center_px.1 - proj.center_px.1.round()).abs() < 1e-9);
        let img = render_subimage(&[t], &cfg, &ch, &sensor).unwrap();
        let (rx, ry) = blur_radius(&cfg, &ch, z).unwrap();
        let k = gaussian_psf(rx, ry, cfg.kappa, sensor.pixel_pitch, 61).unwrap();
        let w = subimage_geometry(&cfg, &ch, &sensor).unwrap().window;
        let mx = proj.center_px.0.round() as usize - w.x0;
        let my = proj.center_px.1.round() as usize - w.y0;
        let mut worst = 0.0f64;
        for y in 0..61 {
            for x in 0..61 {
                let got = img.get(mx + x - 30, my + y - 30);
                worst = worst.max((got - k.get(x, y)).abs());
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn interior_target_energy_preserved_by_blur() {
        let (cfg, sensor) = setup();
        let ch = cfg.channel(1);
        let t = PlanarTarget {
            texture: Texture::Raster(checker(16, 16, 4, 0.0, 1.0)),
            depth: 0.017,
            physical_pitch: 2e-5,
            center: (0.0, 0.0),
            opacity: Opacity::Opaque,
        };
        let proj = project_target(&cfg, &ch, &sensor, &t).unwrap();
        let w = subimage_geometry(&cfg, &ch, &sensor).unwrap().window;
        let Texture::Raster(tex) = &t.texture else { unreachable!() };
        let (color, _) = resample(tex, &t, &proj, &w);
        let img = render_subimage(&[t], &cfg, &ch, &sensor).unwrap();
        assert!((img.sum() - color.sum()).abs() < 1e-4 * color.sum());
    }

    #[test]
    fn opaque_near_target_hides_far_one() {
        let (cfg, sensor) = setup();
        let ch = cfg.channel(1);
        let zf = focal_object_distance(&channel_system_matrix(&cfg, &ch)).unwrap();
        let far = PlanarTarget {
            texture: Texture::Raster(Raster::filled(8, 8, 3.0)),
            depth: zf,
            physical_pitch: 2e-5,
            center: (0.0, 0.0),
            opacity: Opacity::Opaque,
        };
        let near = PlanarTarget {
            texture: Texture::Raster(Raster::filled(40, 40, 0.0)),
            depth: zf * 0.999,
            ..far.clone()
        };
        let img = render_subimage(&[near, far], &cfg, &ch, &sensor).unwrap();
        let g = subimage_geometry(&cfg, &ch, &sensor).unwrap();
        let (cx, cy) = (
            g.center_px.0.round() as usize - g.window.x0,
            g.center_px.1.round() as usize - g.window.y0,
        );
        assert_eq!(img.get(cx, cy), 0.0);
    }

    #[test]
    fn empty_scene_renders_black() {
        let (cfg, sensor) = setup();
        let img = render_subimage(&[], &cfg, &cfg.channel(2), &sensor).unwrap();
        assert_eq!(img.max(), 0.0);
    }
}
