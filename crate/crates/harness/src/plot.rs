//! Minimal SVG line plots: one polyline per series, optional log axes,
//! axis labels and a legend.

use std::fmt::Write as _;
use std::path::Path;

use shampoo_core::TraceRecord;

use crate::error::{HarnessError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

impl PlotStyle {
    pub fn log_log(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: true,
            log_y: true,
        }
    }
}

/// `(k, column(record))` for every record where the column is present.
pub fn series_from_trace(label: &str, trace: &[TraceRecord], column: impl Fn(&TraceRecord) -> Option<f64>) -> Series {
    Series {
        label: label.into(),
        points: trace
            .iter()
            .filter_map(|r| column(r).map(|y| (r.k as f64, y)))
            .collect(),
    }
}

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return None;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil().max(lo + 1.0);
        } else if hi == lo {
            lo -= 0.5;
            hi += 0.5;
        }
        Some(Self { log, lo, hi })
    }

    fn usable(&self, v: f64) -> bool {
        v.is_finite() && (!self.log || v > 0.0)
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions as fractions with their labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let span = (self.hi - self.lo) as i64;
            let stride = (span / 8).max(1);
            (0..=span)
                .step_by(stride as usize)
                .map(|i| {
                    let e = self.lo as i64 + i;
                    ((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}"))
                })
                .collect()
        } else {
            (0..=4)
                .map(|i| {
                    let f = i as f64 / 4.0;
                    (f, format!("{:.3}", self.lo + f * (self.hi - self.lo)))
                })
                .collect()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the plot as an SVG document. Points that cannot be placed on a
/// log axis are dropped.
pub fn render_svg(series: &[Series], style: &PlotStyle) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let all = || series.iter().flat_map(|s| s.points.iter().copied());
    let x_axis = Axis::fit(
        all()
            .map(|p| p.0)
            .filter(|v| v.is_finite() && (!style.log_x || *v > 0.0)),
        style.log_x,
    );
    let y_axis = Axis::fit(
        all()
            .map(|p| p.1)
            .filter(|v| v.is_finite() && (!style.log_y || *v > 0.0)),
        style.log_y,
    );

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&style.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(&style.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&style.y_label)
    );

    if let (Some(xa), Some(ya)) = (x_axis, y_axis) {
        for (f, label) in xa.ticks() {
            let x = LEFT + f * plot_w;
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
                TOP + plot_h,
                TOP + plot_h + 5.0,
                TOP + plot_h + 20.0
            );
        }
        for (f, label) in ya.ticks() {
            let y = TOP + (1.0 - f) * plot_h;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0
            );
        }
        for (i, s) in series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| xa.usable(*x) && ya.usable(*y))
                .map(|&(x, y)| {
                    format!(
                        "{:.2},{:.2}",
                        LEFT + xa.frac(x) * plot_w,
                        TOP + (1.0 - ya.frac(y)) * plot_h
                    )
                })
                .collect();
            if !pts.is_empty() {
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    pts.join(" ")
                );
            }
        }
    }

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            x + 25.0,
            x + 30.0,
            y + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_plot_svg(series: &[Series], style: &PlotStyle, path: &Path) -> Result<()> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(HarnessError::Failed(format!("{}: nothing to plot", path.display())));
    }
    std::fs::write(path, render_svg(series, style)).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_series_and_legend() {
        let series = vec![
            Series {
                label: "λ = 0.1".into(),
                points: vec![(1.0, 1.0), (10.0, 0.5), (100.0, 0.0)],
            },
            Series {
                label: "λ = 0".into(),
                points: vec![(1.0, 2.0), (1000.0, 1e-3)],
            },
        ];
        let svg = render_svg(&series, &PlotStyle::log_log("t", "step k", "y"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("λ = 0.1") && svg.contains("step k"));
        // the zero is dropped on a log axis
        assert_eq!(
            svg.lines()
                .find(|l| l.contains("<polyline"))
                .unwrap()
                .matches(',')
                .count(),
            2
        );
        assert!(svg.contains(">1e-3<") && svg.contains(">1e3<"));
    }

    #[test]
    fn linear_axes_handle_constant_series() {
        let style = PlotStyle {
            log_x: false,
            log_y: false,
            ..PlotStyle::log_log("t", "x", "y")
        };
        let svg = render_svg(
            &[Series {
                label: "c".into(),
                points: vec![(0.0, 3.0), (1.0, 3.0)],
            }],
            &style,
        );
        assert!(!svg.contains("NaN"));
    }
}
