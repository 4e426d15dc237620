//! Minimal self-contained SVG 1.1 figures: a line plot and a heat map.

use std::fmt::Write as _;

use crate::csv::format_number;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
/// Preferred number of tick intervals per axis.
const TICKS: usize = 6;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    /// Contiguous pieces; a polyline is not drawn across pieces.
    pub segments: Vec<Vec<(f64, f64)>>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            segments: vec![points],
        }
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if hi > lo {
                (lo, hi)
            } else {
                let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
                (lo - pad, hi + pad)
            }
        };
        Frame {
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (f.px(f.x.0), f.px(f.x.1));
    let (y0, y1) = (f.py(f.y.0), f.py(f.y.1));
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" fill="none" stroke="black"/>"#
    );
    for fx in ticks(f.x) {
        let tx = f.px(fx);
        let _ = writeln!(
            out,
            r#"<line x1="{tx:.2}" y1="{y0:.2}" x2="{tx:.2}" y2="{:.2}" stroke="black"/><text x="{tx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            format_number(fx)
        );
    }
    for fy in ticks(f.y) {
        let ty = f.py(fy);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{ty:.2}" x2="{x0:.2}" y2="{ty:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            ty + 4.0,
            format_number(fy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(16,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

/// Round tick positions (steps of 1, 2 or 5 × 10^k) inside `range`.
fn ticks((lo, hi): (f64, f64)) -> Vec<f64> {
    let span = hi - lo;
    let mag = 10f64.powf((span / TICKS as f64).log10().floor());
    let step = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .min_by(|a, b| {
            let miss = |s: f64| (span / s - TICKS as f64).abs();
            miss(*a).total_cmp(&miss(*b))
        })
        .unwrap_or(mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .map(|k| {
            // Snap to the decimal grid so labels read 0.2, not 0.20000000000000004.
            let v = k as f64 * step;
            format!("{v:.6e}").parse().unwrap_or(v)
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let points = || series.iter().flat_map(|s| s.segments.iter().flatten());
    let mut x = bounds(points().map(|p| &p.0));
    let mut y = bounds(points().map(|p| &p.1));
    if !x.0.is_finite() {
        x = (0.0, 1.0);
        y = (0.0, 1.0);
    }
    let frame = Frame::new(x, y);
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &frame, x_label, y_label);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        for seg in s.segments.iter().filter(|seg| !seg.is_empty()) {
            let pts: Vec<String> = seg
                .iter()
                .map(|&(a, b)| format!("{:.2},{:.2}", frame.px(a), frame.py(b)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = MARGIN_TOP + 16.0 * k as f64 + 10.0;
        let lx = WIDTH - MARGIN_RIGHT - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// `values[i * y_axis.len() + j]` is drawn at (x_axis[i], y_axis[j]) on a
/// white-to-blue scale normalized to the maximum.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, x_axis: &[f64], y_axis: &[f64], values: &[f64]) -> String {
    let half = |axis: &[f64]| {
        if axis.len() > 1 {
            0.5 * (axis[1] - axis[0])
        } else {
            0.5
        }
    };
    let (hx, hy) = (half(x_axis), half(y_axis));
    let x = bounds(x_axis.iter());
    let y = bounds(y_axis.iter());
    let frame = Frame::new((x.0 - hx, x.1 + hx), (y.0 - hy, y.1 + hy));
    let peak = values.iter().copied().fold(0.0, f64::max);
    let mut out = String::new();
    open(&mut out, title);
    for (i, &xv) in x_axis.iter().enumerate() {
        for (j, &yv) in y_axis.iter().enumerate() {
            let v = values[i * y_axis.len() + j];
            let t = if peak > 0.0 { (v / peak).clamp(0.0, 1.0) } else { 0.0 };
            if t < 0.004 {
                continue;
            }
            let shade = |c0: f64, c1: f64| (c0 + (c1 - c0) * t).round() as u8;
            let (x0, x1) = (frame.px(xv - hx), frame.px(xv + hx));
            let (y0, y1) = (frame.py(yv + hy), frame.py(yv - hy));
            let _ = writeln!(
                out,
                r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#{:02x}{:02x}{:02x}"/>"##,
                x1 - x0,
                y1 - y0,
                shade(255.0, 8.0),
                shade(255.0, 48.0),
                shade(255.0, 107.0)
            );
        }
    }
    axes(&mut out, &frame, x_label, y_label);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_well_formed() {
        let svg = line_plot(
            "t <1>",
            "x",
            "y",
            &[Series::new("a & b", vec![(0.0, 0.0), (1.0, 2.0)])],
        );
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("t &lt;1&gt;") && svg.contains("a &amp; b"));
    }

    #[test]
    fn heatmap_skips_blank_cells() {
        let svg = heatmap("h", "x", "y", &[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0, 0.0, 0.5]);
        assert_eq!(svg.matches("<rect x=").count(), 2);
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks((0.0, 1.0)), vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert_eq!(ticks((-3e-12, 3e-12)), vec![-3e-12, -2e-12, -1e-12, 0.0, 1e-12, 2e-12, 3e-12]);
        assert_eq!(ticks((300.0, 440.0)), vec![300.0, 320.0, 340.0, 360.0, 380.0, 400.0, 420.0, 440.0]);
    }

    #[test]
    fn degenerate_ranges_do_not_divide_by_zero() {
        let svg = line_plot("f", "x", "y", &[Series::new("c", vec![(1.0, 0.5), (1.0, 0.5)])]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
