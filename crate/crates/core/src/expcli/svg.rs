//! Minimal SVG 1.1 line plots. Output depends only on the input, with all
//! coordinates printed at fixed precision.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 130.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#c0392b", "#2c3e50", "#27ae60", "#8e44ad", "#d35400", "#16a085"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    /// File stem for the written plot.
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl PlotSpec {
    pub fn new(name: &str, title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            name: name.into(),
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    pub fn with_series(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { name: name.into(), points });
        self
    }

    pub fn point_count(&self) -> usize {
        self.series.iter().map(|s| s.points.len()).sum()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        Self { lo: lo - pad, hi: hi + pad, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    /// Five evenly spaced ticks in transformed units, labelled in data units.
    fn ticks(&self) -> Vec<(f64, String)> {
        (0..5)
            .map(|k| {
                let f = k as f64 / 4.0;
                let t = self.lo + f * (self.hi - self.lo);
                let label = if self.log { format!("1e{t:.1}") } else { format!("{t:.3}") };
                (f, label)
            })
            .collect()
    }
}

fn usable(p: &(f64, f64), spec: &PlotSpec) -> bool {
    p.0.is_finite() && p.1.is_finite() && (!spec.log_x || p.0 > 0.0) && (!spec.log_y || p.1 > 0.0)
}

/// SVG text of the plot. Points that are non-finite, or non-positive on a log
/// axis, are skipped.
pub fn render_svg(spec: &PlotSpec) -> Result<String> {
    if spec.point_count() == 0 {
        return Err(Error::EmptyRows);
    }
    let pts = || spec.series.iter().flat_map(|s| s.points.iter()).filter(|p| usable(p, spec));
    let xa = Axis::fit(pts().map(|p| p.0), spec.log_x);
    let ya = Axis::fit(pts().map(|p| p.1), spec.log_y);
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + xa.frac(x) * pw;
    let py = |y: f64| MARGIN_T + (1.0 - ya.frac(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH:.0}" height="{HEIGHT:.0}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#, MARGIN_L + pw / 2.0, escape(&spec.title));
    let _ = writeln!(s, r#"<rect x="{MARGIN_L:.1}" y="{MARGIN_T:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#);
    for (f, label) in xa.ticks() {
        let x = MARGIN_L + f * pw;
        let yb = MARGIN_T + ph;
        let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{yb:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#, yb + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#, yb + 18.0);
    }
    for (f, label) in ya.ticks() {
        let y = MARGIN_T + (1.0 - f) * ph;
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{y:.1}" x2="{MARGIN_L:.1}" y2="{y:.1}" stroke="black"/>"#, MARGIN_L - 5.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#, MARGIN_L - 8.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, MARGIN_L + pw / 2.0, HEIGHT - 10.0, escape(&spec.x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(&spec.y_label)
    );
    for (k, series) in spec.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let good: Vec<&(f64, f64)> = series.points.iter().filter(|p| usable(p, spec)).collect();
        if good.len() > 1 {
            let path: Vec<String> = good.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        }
        for p in &good {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(p.0), py(p.1));
        }
        let ly = MARGIN_T + 14.0 + 18.0 * k as f64;
        let lx = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&series.name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(spec: &PlotSpec, path: &Path) -> Result<()> {
    let text = render_svg(spec)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_plot_refused() {
        assert!(matches!(render_svg(&PlotSpec::new("p", "t", "x", "y")), Err(Error::EmptyRows)));
    }

    #[test]
    fn deterministic_and_well_formed() {
        let spec = PlotSpec::new("p", "a < b & c", "x", "y")
            .log_y()
            .with_series("sm", vec![(1.0, 1e-2), (2.0, 1e3), (3.0, 0.0)])
            .with_series("mle", vec![(1.0, 1e-2), (2.0, 2e-2)]);
        let a = render_svg(&spec).unwrap();
        assert_eq!(a, render_svg(&spec).unwrap());
        assert!(a.contains(r#"version="1.1""#));
        assert!(a.contains("a &lt; b &amp; c"));
        assert_eq!(a.matches("<polyline").count(), 2);
        // The zero on the log axis is dropped.
        assert_eq!(a.matches("<circle").count(), 4);
        assert!(a.trim_end().ends_with("</svg>"));
    }
}
