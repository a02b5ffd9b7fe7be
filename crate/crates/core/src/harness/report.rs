use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use super::experiment::THRESHOLDS;
use crate::diagnostics::{read_csv, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::serial::sig17;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_T: f64 = 40.0;
const GAP: f64 = 110.0;

/// A trace read back from CSV, labelled by its file stem.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSeries {
    pub label: String,
    pub records: Vec<DiagnosticsRecord>,
}

impl TraceSeries {
    pub fn read(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let records = read_csv(f)?;
        if records.is_empty() {
            return Err(Error::invalid(format!("{}: trace has no rows", path.display())));
        }
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(TraceSeries { label, records })
    }
}

struct Metric {
    key: &'static str,
    title: &'static str,
    get: fn(&DiagnosticsRecord) -> Option<f64>,
}

const METRICS: [Metric; 2] = [
    Metric { key: "consensus_residual", title: "consensus residual", get: |r| Some(r.consensus_residual) },
    Metric { key: "objective_gap", title: "ergodic objective gap", get: |r| r.objective_gap },
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Runs of consecutive records with a positive value, as `(t, log10 v)`.
fn positive_runs(records: &[DiagnosticsRecord], get: fn(&DiagnosticsRecord) -> Option<f64>) -> Vec<Vec<(usize, f64)>> {
    let mut runs = vec![];
    let mut cur = vec![];
    for r in records {
        match get(r) {
            Some(v) if v > 0.0 && v.is_finite() => cur.push((r.t, v.log10())),
            _ => {
                if !cur.is_empty() {
                    runs.push(std::mem::take(&mut cur));
                }
            }
        }
    }
    if !cur.is_empty() {
        runs.push(cur);
    }
    runs
}

/// Log-scale convergence plot with one panel per metric and one curve per
/// trace. Curves are polylines in data coordinates `(t, log10 value)` inside
/// a transformed group, so every plotted point is the exact logarithm of its
/// CSV value. Nonpositive values are left out of the plot.
pub fn render_svg(series: &[TraceSeries]) -> String {
    let width = 2.0 * (MARGIN_L + PANEL_W) + GAP;
    let legend_h = 20.0 * series.len() as f64;
    let height = MARGIN_T + PANEL_H + 60.0 + legend_h;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let t_max = series.iter().flat_map(|s| s.records.last()).map(|r| r.t).max().unwrap_or(0).max(1) as f64;

    for (pi, metric) in METRICS.iter().enumerate() {
        let ox = MARGIN_L + pi as f64 * (PANEL_W + MARGIN_L + GAP);
        let oy = MARGIN_T;
        let runs: Vec<Vec<Vec<(usize, f64)>>> = series.iter().map(|tr| positive_runs(&tr.records, metric.get)).collect();
        let ys = runs.iter().flatten().flatten().map(|p| p.1);
        let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        let (y0, mut y1) = if lo.is_finite() { (lo.floor(), hi.ceil()) } else { (-1.0, 0.0) };
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let sx = PANEL_W / t_max;
        let sy = PANEL_H / (y1 - y0);

        let _ = writeln!(s, r#"<g id="panel-{}">"#, metric.key);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
            ox + PANEL_W / 2.0,
            oy - 14.0,
            metric.title
        );
        let _ = writeln!(
            s,
            r##"<rect x="{ox}" y="{oy}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
        );
        let mut d = y0 as i64;
        let step = (((y1 - y0) / 8.0).ceil() as i64).max(1);
        while d as f64 <= y1 {
            let py = oy + PANEL_H - (d as f64 - y0) * sy;
            let _ = writeln!(
                s,
                r##"<line x1="{ox}" y1="{py}" x2="{}" y2="{py}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">1e{d}</text>"##,
                ox + PANEL_W,
                ox - 6.0,
                py + 4.0
            );
            d += step;
        }
        for k in 0..=4 {
            let t = (t_max * k as f64 / 4.0).round();
            let px = ox + t * sx;
            let _ = writeln!(
                s,
                r#"<text x="{px}" y="{}" text-anchor="middle">{t}</text>"#,
                oy + PANEL_H + 16.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#,
            ox + PANEL_W / 2.0,
            oy + PANEL_H + 34.0
        );
        let _ = writeln!(
            s,
            r#"<g class="curves" transform="translate({ox} {}) scale({} {}) translate(0 {})">"#,
            oy + PANEL_H,
            sig17(sx),
            sig17(-sy),
            sig17(-y0)
        );
        for (si, (tr, runs)) in series.iter().zip(&runs).enumerate() {
            let color = PALETTE[si % PALETTE.len()];
            for run in runs {
                let pts: Vec<String> = run.iter().map(|(t, y)| format!("{t},{}", sig17(*y))).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline data-label="{}" data-metric="{}" fill="none" stroke="{color}" stroke-width="1.5" vector-effect="non-scaling-stroke" points="{}"/>"#,
                    escape(&tr.label),
                    metric.key,
                    pts.join(" ")
                );
            }
        }
        let _ = writeln!(s, "</g>\n</g>");
    }

    let ly = MARGIN_T + PANEL_H + 56.0;
    let _ = writeln!(s, r#"<g id="legend">"#);
    for (si, tr) in series.iter().enumerate() {
        let y = ly + 20.0 * si as f64;
        let color = PALETTE[si % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{MARGIN_L}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            MARGIN_L + 24.0,
            MARGIN_L + 30.0,
            y + 4.0,
            escape(&tr.label)
        );
    }
    let _ = writeln!(s, "</g>\n</svg>");
    s
}

fn summary_text(series: &[TraceSeries]) -> String {
    let mut out = String::new();
    for tr in series {
        let last = tr.records.last().expect("nonempty trace");
        let gap = last.objective_gap.map(sig17).unwrap_or_else(|| "n/a".into());
        let _ = writeln!(
            out,
            "{}: {} iterations, final consensus residual {}, final objective gap {}",
            tr.label,
            last.t,
            sig17(last.consensus_residual),
            gap
        );
        for th in THRESHOLDS {
            let hit = tr.records.iter().skip(1).find(|r| r.consensus_residual < th);
            match hit {
                Some(r) => _ = writeln!(out, "  consensus residual < {th:e} first at t = {}", r.t),
                None => _ = writeln!(out, "  consensus residual < {th:e} not reached"),
            }
        }
    }
    out
}

/// Reads the traces, writes the SVG plot, and returns a text summary of
/// threshold crossings.
pub fn report(traces: &[PathBuf], svg: &Path) -> Result<String> {
    if traces.is_empty() {
        return Err(Error::invalid("report needs at least one trace"));
    }
    let series = traces.iter().map(|p| TraceSeries::read(p)).collect::<Result<Vec<_>>>()?;
    fs::write(svg, render_svg(&series)).map_err(|e| Error::io(svg, e))?;
    Ok(summary_text(&series))
}
