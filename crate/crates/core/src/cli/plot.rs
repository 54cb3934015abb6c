//! Minimal self-contained SVG line plots.

use crate::error::{Error, Result};
use crate::verify::Plot;
use std::fmt::Write;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Round step for about `n` ticks over `span`.
fn tick_step(span: f64, n: f64) -> f64 {
    let raw = span / n;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return Some((lo - pad, hi + pad));
    }
    let pad = 0.05 * (hi - lo);
    Some((lo - pad, hi + pad))
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64, step: f64) -> String {
    if v.abs() < 1e-12 * step.max(1e-300) {
        return "0".into();
    }
    if step >= 1e-3 && v.abs() < 1e5 {
        let digits = (-step.log10().floor()).max(0.0) as usize;
        format!("{v:.digits$}")
    } else {
        format!("{v:.1e}")
    }
}

/// Render `plot` as an SVG document.
pub fn emit_plot(plot: &Plot) -> Result<String> {
    let pts = plot.series.iter().flat_map(|s| s.x.iter().zip(&s.y)).filter(|(x, y)| x.is_finite() && y.is_finite());
    if pts.count() == 0 {
        return Err(Error::EmptyData(format!("plot '{}' has no finite points", plot.title)));
    }
    for s in &plot.series {
        if s.x.len() != s.y.len() {
            return Err(Error::EmptyData(format!("series '{}' has mismatched lengths", s.label)));
        }
    }
    let (x0, x1) = range(plot.series.iter().flat_map(|s| s.x.iter().copied())).expect("nonempty");
    let (y0, y1) = range(plot.series.iter().flat_map(|s| s.y.iter().copied())).expect("nonempty");
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(w, r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, esc(&plot.title));
    let _ = writeln!(w, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

    let xs = tick_step(x1 - x0, 6.0);
    let mut t = (x0 / xs).ceil() * xs;
    while t <= x1 + 1e-9 * xs {
        let px = sx(t);
        let _ = writeln!(w, r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(w, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 19.0, fmt_tick(t, xs));
        t += xs;
    }
    let ys = tick_step(y1 - y0, 6.0);
    let mut t = (y0 / ys).ceil() * ys;
    while t <= y1 + 1e-9 * ys {
        let py = sy(t);
        let _ = writeln!(w, r#"<line x1="{}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(w, r#"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="lightgray"/>"#, LEFT + pw);
        let _ = writeln!(w, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, py + 4.0, fmt_tick(t, ys));
        t += ys;
    }
    let _ = writeln!(w, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0, esc(&plot.x_label));
    let _ = writeln!(
        w,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        esc(&plot.y_label)
    );

    for (k, s) in plot.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> =
            s.x.iter().zip(&s.y).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(&x, &y)| (sx(x), sy(y))).collect();
        if pts.len() == 1 {
            let _ = writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#, pts[0].0, pts[0].1);
        } else if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#, path.join(" "));
        }
        let ly = TOP + 10.0 + 20.0 * k as f64;
        let lx = LEFT + pw + 15.0;
        let _ = writeln!(w, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 22.0);
        let _ = writeln!(w, r#"<text x="{}" y="{}">{}</text>"#, lx + 28.0, ly + 4.0, esc(&s.label));
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Series;

    fn plot(series: Vec<Series>) -> Plot {
        Plot { title: "t".into(), x_label: "x (m)".into(), y_label: "y (s)".into(), series }
    }

    #[test]
    fn single_point_gives_one_marker() {
        let svg = emit_plot(&plot(vec![Series::new("p", vec![1.0], vec![2.0])])).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_data_is_an_error() {
        assert!(emit_plot(&plot(vec![])).is_err());
        assert!(emit_plot(&plot(vec![Series::new("p", vec![], vec![])])).is_err());
    }

    #[test]
    fn legend_lists_every_series() {
        let x = vec![0.0, 1.0, 2.0];
        let svg = emit_plot(&plot(vec![
            Series::new("exact", x.clone(), vec![1.0, 0.6, 0.1]),
            Series::new("limit", x.clone(), vec![1.0, 0.61, 0.13]),
            Series::new("empirical", x, vec![0.98, 0.6, 0.12]),
        ]))
        .unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        for l in ["exact", "limit", "empirical"] {
            assert!(svg.contains(&format!(">{l}</text>")));
        }
        assert!(svg.contains("x (m)") && svg.contains("y (s)"));
    }

    #[test]
    fn tick_steps_are_round() {
        assert_eq!(tick_step(10.0, 5.0), 2.0);
        assert_eq!(tick_step(1.0, 6.0), 0.2);
        assert!((tick_step(0.003, 6.0) - 5e-4).abs() < 1e-18);
    }
}
