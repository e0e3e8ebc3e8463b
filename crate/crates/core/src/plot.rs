//! Self-contained SVG line plots with deterministic output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::bundles::BundleRunOutput;
use crate::error::{Error, Result};
use crate::macro1d::SimulationOutput;
use crate::material::BAR;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    /// Axis labels including the unit, e.g. "t (s)".
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl LinePlot {
    /// False when no series has a finite point.
    pub fn has_data(&self) -> bool {
        self.series.iter().flat_map(|s| &s.points).any(|p| p.0.is_finite() && p.1.is_finite())
    }

    pub fn to_svg(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| &s.points).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in pts() {
            x0 = x0.min(p.0);
            x1 = x1.max(p.0);
            y0 = y0.min(p.1);
            y1 = y1.max(p.1);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let (xt, x0, x1) = ticks(x0, x1);
        let (yt, y0, y1) = ticks(y0, y1);
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let step = |t: &[f64]| if t.len() > 1 { t[1] - t[0] } else { 1.0 };
        for &x in &xt {
            let px = sx(x);
            let _ = writeln!(
                s,
                r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#e0e0e0"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                TOP + ph,
                TOP + ph + 18.0,
                label(x, step(&xt))
            );
        }
        for &y in &yt {
            let py = sy(y);
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e0e0e0"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                py + 4.0,
                label(y, step(&yt))
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text transform="translate(20 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let coords: Vec<String> = series
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
                .collect();
            if !coords.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    coords.join(" ")
                );
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            let lx = LEFT + pw + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_svg()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Round tick positions covering [lo, hi] and the widened range.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, f64, f64) {
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    };
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag);
    let start = (lo / step).floor();
    let end = (hi / step).ceil();
    let t: Vec<f64> = (0..=(end - start) as i64).map(|k| (start + k as f64) * step).collect();
    (t, start * step, end * step)
}

fn label(v: f64, step: f64) -> String {
    let digits = (-step.log10().floor()).max(0.0) as usize + usize::from((step / 10f64.powf(step.log10().floor()) - 2.5).abs() < 1e-9);
    let s = format!("{v:.digits$}");
    // avoid "-0"
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Files written and plots skipped for lack of data.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotReport {
    pub written: Vec<PathBuf>,
    pub skipped: Vec<String>,
}

fn emit(plots: Vec<(&str, LinePlot)>, dir: &Path) -> Result<PlotReport> {
    let mut report = PlotReport::default();
    for (name, plot) in plots {
        if plot.has_data() {
            let path = dir.join(name);
            plot.write(&path)?;
            report.written.push(path);
        } else {
            report.skipped.push(name.to_string());
        }
    }
    Ok(report)
}

/// force.svg, sensors.svg and orientation.svg of a press run.
pub fn simulation_plots(out: &SimulationOutput) -> Vec<(&'static str, LinePlot)> {
    let series = |label: &str, f: &dyn Fn(&crate::macro1d::OutputRecord) -> f64| Series {
        label: label.to_string(),
        points: out.records.iter().map(|r| (r.t, f(r))).collect(),
    };
    vec![
        (
            "force.svg",
            LinePlot {
                title: "Press force".into(),
                x_label: "t (s)".into(),
                y_label: "F (kN)".into(),
                series: vec![series("F", &|r| r.force / 1e3)],
            },
        ),
        (
            "sensors.svg",
            LinePlot {
                title: "Sensor pressures".into(),
                x_label: "t (s)".into(),
                y_label: "p (bar)".into(),
                series: out
                    .sensor_positions
                    .iter()
                    .enumerate()
                    .map(|(k, x)| Series {
                        label: format!("{:.0} mm", x * 1e3),
                        points: out.records.iter().map(|r| (r.t, r.sensors[k] / BAR)).collect(),
                    })
                    .collect(),
            },
        ),
        (
            "orientation.svg",
            LinePlot {
                title: "Orientation at mid-charge".into(),
                x_label: "t (s)".into(),
                y_label: "A (-)".into(),
                series: vec![series("Axx", &|r| r.axx_mid), series("Ayy", &|r| r.ayy_mid)],
            },
        ),
    ]
}

pub fn emit_plots(out: &SimulationOutput, dir: &Path) -> Result<PlotReport> {
    emit(simulation_plots(out), dir)
}

/// orientation.svg of a bundle run.
pub fn emit_bundle_plots(out: &BundleRunOutput, dir: &Path) -> Result<PlotReport> {
    let comp = |label: &str, i: usize| Series {
        label: label.to_string(),
        points: out.diagnostics.iter().map(|d| (d.t, d.a[i])).collect(),
    };
    let plot = LinePlot {
        title: "Bundle orientation".into(),
        x_label: "t (s)".into(),
        y_label: "A (-)".into(),
        series: vec![comp("Axx", 0), comp("Ayy", 1), comp("Axy", 3)],
    };
    emit(vec![("orientation.svg", plot)], dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot() -> LinePlot {
        LinePlot {
            title: "a <b>".into(),
            x_label: "t (s)".into(),
            y_label: "F (kN)".into(),
            series: vec![
                Series {
                    label: "one".into(),
                    points: (0..50).map(|i| (i as f64 * 0.1, (i as f64 * 0.1).sin())).collect(),
                },
                Series {
                    label: "two".into(),
                    points: vec![(0.0, 2.0), (f64::NAN, 1.0), (4.9, -1.5)],
                },
            ],
        }
    }

    #[test]
    fn deterministic_and_self_contained() {
        let a = plot().to_svg();
        assert_eq!(a, plot().to_svg());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(!a.contains("href") && !a.contains("NaN"));
        assert!(a.contains("a &lt;b&gt;") && a.contains("t (s)") && a.contains("F (kN)"));
        assert_eq!(a.matches("<polyline").count(), 2);
    }

    #[test]
    fn ticks_cover_the_range() {
        let (t, lo, hi) = ticks(0.13, 4.7);
        assert!(lo <= 0.13 && hi >= 4.7);
        assert_eq!((t[0], *t.last().unwrap()), (lo, hi));
        let (_, lo, hi) = ticks(3.0, 3.0);
        assert!(lo < 3.0 && hi > 3.0);
        assert_eq!(label(-0.0, 0.5), "0.0");
        assert_eq!(label(1.25, 0.25), "1.25");
        assert_eq!(label(4400.0, 1000.0), "4400");
    }

    #[test]
    fn empty_series_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = plot();
        p.series.iter_mut().for_each(|s| s.points.clear());
        assert!(!p.has_data());
        let r = emit(vec![("x.svg", p), ("y.svg", plot())], dir.path()).unwrap();
        assert_eq!(r.skipped, vec!["x.svg".to_string()]);
        assert_eq!(r.written, vec![dir.path().join("y.svg")]);
    }
}
