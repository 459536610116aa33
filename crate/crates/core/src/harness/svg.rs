//! Minimal hand-written SVG plots with fixed-precision coordinates.

use std::fmt::Write;

use crate::dfdd::{Histogram, MetricsRow};

const W: f64 = 480.0;
const H: f64 = 320.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 44.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        W / 2.0,
        escape(title)
    )
    .unwrap();
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Axes with `ticks` labelled divisions on each.
fn axes(s: &mut String, f: &Frame, xlabel: &str, ylabel: &str, ticks: usize) {
    let (bx, by) = (f.py(f.y0), f.px(f.x0));
    writeln!(
        s,
        r#"<path d="M{by:.2},{:.2} V{bx:.2} H{:.2}" fill="none" stroke="black"/>"#,
        f.py(f.y1),
        f.px(f.x1)
    )
    .unwrap();
    for i in 0..=ticks {
        let t = i as f64 / ticks as f64;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            f.px(xv),
            bx + 14.0,
            tick_label(xv)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            by - 4.0,
            f.py(yv) + 4.0,
            tick_label(yv)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 8.0,
        escape(xlabel)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(ylabel)
    )
    .unwrap();
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn polyline(s: &mut String, f: &Frame, pts: &[(f64, f64)], style: &str) {
    let d: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
        .collect();
    writeln!(s, r#"<polyline points="{}" fill="none" {style}/>"#, d.join(" ")).unwrap();
}

/// Bar chart of a depth histogram, weights normalized to unit sum, with a
/// marker at the true depth.
pub fn histogram_svg(h: &Histogram, true_depth: f64) -> String {
    let total: f64 = h.weights.iter().sum();
    let bins: Vec<(f64, f64)> = h
        .weights
        .iter()
        .enumerate()
        .map(|(i, &w)| (h.bin_start(i) * 1e3, if total > 0.0 { w / total } else { 0.0 }))
        .collect();
    let bw = h.bin_width * 1e3;
    let zt = true_depth * 1e3;
    let lo = bins.first().map_or(zt, |b| b.0).min(zt - bw);
    let hi = bins.last().map_or(zt, |b| b.0 + bw).max(zt + bw);
    let top = bins.iter().map(|b| b.1).fold(0.0, f64::max).max(1e-12);
    let f = Frame {
        x0: lo,
        x1: hi,
        y0: 0.0,
        y1: top * 1.1,
    };
    let mut s = open(&format!("Estimated depth, true {zt:.2} mm"));
    for &(x, w) in &bins {
        if w <= 0.0 {
            continue;
        }
        let (x0, x1) = (f.px(x), f.px(x + bw));
        let (y0, y1) = (f.py(w), f.py(0.0));
        writeln!(
            s,
            r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#4a78b5"/>"##,
            (x1 - x0).max(0.5),
            y1 - y0
        )
        .unwrap();
    }
    polyline(
        &mut s,
        &f,
        &[(zt, 0.0), (zt, f.y1)],
        r##"stroke="#c0392b" stroke-dasharray="4 3""##,
    );
    axes(&mut s, &f, "depth (mm)", "weight fraction", 4);
    s.push_str("</svg>\n");
    s
}

/// Mean estimate per true depth with a mean +- MAE band, the identity line
/// and the 5 % relative-error boundaries.
pub fn band_svg(rows: &[MetricsRow]) -> String {
    let z: Vec<f64> = rows.iter().map(|r| r.true_depth_mm).collect();
    let zmin = z.iter().cloned().fold(f64::INFINITY, f64::min);
    let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (zmin, zmax) = if zmin < zmax { (zmin, zmax) } else { (zmin - 1.0, zmax + 1.0) };
    let ylo = rows
        .iter()
        .map(|r| r.mean_pred_mm - r.mae_mm)
        .fold(0.95 * zmin, f64::min);
    let yhi = rows
        .iter()
        .map(|r| r.mean_pred_mm + r.mae_mm)
        .fold(1.05 * zmax, f64::max);
    let f = Frame {
        x0: zmin,
        x1: zmax,
        y0: ylo,
        y1: yhi,
    };
    let mut s = open("Estimated vs true depth");
    let mut band: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2},{:.2}", f.px(r.true_depth_mm), f.py(r.mean_pred_mm + r.mae_mm)))
        .collect();
    band.extend(
        rows.iter()
            .rev()
            .map(|r| format!("{:.2},{:.2}", f.px(r.true_depth_mm), f.py(r.mean_pred_mm - r.mae_mm))),
    );
    writeln!(
        s,
        r##"<polygon points="{}" fill="#4a78b5" fill-opacity="0.3" stroke="none"/>"##,
        band.join(" ")
    )
    .unwrap();
    let line = |k: f64| vec![(zmin, k * zmin), (zmax, k * zmax)];
    polyline(&mut s, &f, &line(1.0), r#"stroke="black" stroke-width="0.8""#);
    for k in [0.95, 1.05] {
        polyline(
            &mut s,
            &f,
            &line(k),
            r##"stroke="#c0392b" stroke-dasharray="4 3""##,
        );
    }
    let mean: Vec<(f64, f64)> = rows.iter().map(|r| (r.true_depth_mm, r.mean_pred_mm)).collect();
    polyline(&mut s, &f, &mean, r##"stroke="#1f3b66" stroke-width="1.5""##);
    for &(x, y) in &mean {
        writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f3b66"/>"##,
            f.px(x),
            f.py(y)
        )
        .unwrap();
    }
    axes(&mut s, &f, "true depth (mm)", "estimated depth (mm)", 4);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<MetricsRow> {
        (12..=20)
            .map(|z| MetricsRow {
                true_depth_mm: z as f64,
                mean_pred_mm: z as f64 + 0.05,
                mae_mm: 0.1,
                frac_within_5pct: 1.0,
                n_valid: 100,
            })
            .collect()
    }

    #[test]
    fn band_plot_is_well_formed() {
        let s = band_svg(&rows());
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<polyline").count(), 4);
        assert_eq!(s.matches("<circle").count(), 9);
        assert_eq!(s, band_svg(&rows()));
    }

    #[test]
    fn histogram_has_one_bar_per_occupied_bin() {
        let h = Histogram {
            bin_width: 0.25e-3,
            first_bin: 60,
            weights: vec![1.0, 0.0, 3.0],
        };
        let s = histogram_svg(&h, 0.0155);
        assert_eq!(s.matches("<rect").count(), 1 + 2);
    }

    #[test]
    fn labels_trim_zeros() {
        assert_eq!(tick_label(12.0), "12");
        assert_eq!(tick_label(12.5), "12.5");
        assert_eq!(tick_label(-0.001), "0");
    }
}
