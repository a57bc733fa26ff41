//! Minimal SVG line plots with optional power-law guide lines.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::timeseries::read_csv;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub log_log: bool,
    /// When set, draws guides with slopes −1, −1−γ and −2 (log-log only).
    pub guide_gamma: Option<f64>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: String::new(),
            x_label: "t".into(),
            log_log: true,
            guide_gamma: Some(0.25),
        }
    }
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }
    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.02 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Renders the series as an SVG document.
pub fn render(series: &[Series], opts: &PlotOptions) -> Result<String> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(Error::Argument("cannot plot an empty series".into()));
    }
    // non-positive values sit at the smallest positive value present (a flat run plots its floor)
    let floor = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|&y| y > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor } else { f64::MIN_POSITIVE };
    let map = |(x, y): (f64, f64)| {
        if opts.log_log {
            (x.log10(), y.max(floor).log10())
        } else {
            (x, y)
        }
    };
    let mapped: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .copied()
                .filter(|&(x, _)| !opts.log_log || x > 0.0)
                .map(map)
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    if mapped.iter().any(Vec::is_empty) {
        return Err(Error::Argument("no plottable points (log-log needs positive abscissae)".into()));
    }
    let all = mapped.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);
    let ax = Axes { x0, x1, y0, y1 };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let tick = |v: f64| if opts.log_log { format!("1e{v:.1}") } else { format!("{v:.3}") };
    for (i, f) in [0.0, 0.5, 1.0].iter().enumerate() {
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let anchor = ["start", "middle", "end"][i];
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">{}</text>"#,
            ax.px(xv),
            HEIGHT - MARGIN + 16.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            ax.py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&opts.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&opts.title)
    );

    if let (true, Some(gamma)) = (opts.log_log, opts.guide_gamma) {
        let (ax0, ay0) = mapped[0][0];
        for (k, slope) in [-1.0, -1.0 - gamma, -2.0].into_iter().enumerate() {
            let yb = ay0 + slope * (x1 - ax0);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="{}"/>"##,
                ax.px(ax0),
                ax.py(ay0),
                ax.px(x1),
                ax.py(yb.max(y0)),
                ["6,3", "2,2", "8,2,2,2"][k]
            );
            let _ = writeln!(
                svg,
                r##"<text x="{:.1}" y="{:.1}" fill="#666">slope {slope}</text>"##,
                WIDTH - MARGIN - 90.0,
                MARGIN + 16.0 * (k as f64 + 1.0) + 16.0 * series.len() as f64
            );
        }
    }

    for (i, (s, pts)) in series.iter().zip(&mapped).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", ax.px(x), ax.py(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 90.0,
            MARGIN + 16.0 * (i as f64 + 1.0),
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plots columns of a time-series CSV against `x`. Nothing is written on error.
pub fn plot_csv(csv: &Path, x: &str, ys: &[String], out: &Path, opts: &PlotOptions) -> Result<()> {
    let (header, rows) = read_csv(csv)?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Argument(format!("column {name:?} not found in {}", csv.display())))
    };
    let xi = col(x)?;
    let series = ys
        .iter()
        .map(|y| {
            let yi = col(y)?;
            Ok(Series {
                label: y.clone(),
                points: rows.iter().map(|r| (r[xi], r[yi])).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let svg = render(&series, opts)?;
    std::fs::write(out, svg).map_err(|e| Error::io(out, e))
}
