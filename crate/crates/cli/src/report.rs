//! Deterministic CSV and SVG emission. Two runs of the same config must
//! produce identical files, so floats are written in Rust's shortest
//! round-trip form and wall times are zeroed unless explicitly requested.

use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::experiment::{BinApproxRow, ConvergenceRecord, PoissonGapRow};

/// Pinned record schema.
pub const RECORD_CSV_HEADER: &str = "n,N,replicate,seed,d_cut,d_cut_exact,d1,edge_count,runtime_ms";

pub fn records_csv(records: &[ConvergenceRecord], emit_timings: bool) -> String {
    let mut out = String::from(RECORD_CSV_HEADER);
    out.push('\n');
    for r in records {
        let runtime = if emit_timings { r.runtime_ms } else { 0 };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n, r.n_steps, r.replicate, r.seed, r.d_cut, r.d_cut_exact, r.d1, r.edge_count,
            runtime
        ));
    }
    out
}

pub fn emit_records_csv(
    records: &[ConvergenceRecord],
    emit_timings: bool,
    path: &Path,
) -> Result<()> {
    std::fs::write(path, records_csv(records, emit_timings))
        .with_context(|| format!("writing {}", path.display()))
}

pub fn poisson_gap_csv(rows: &[PoissonGapRow]) -> String {
    let mut out = String::from("n,N,d1_exact,bound,bound_variant,chain_exact\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n, r.n_steps, r.d1, r.bound, r.bound_variant, r.chain_exact
        ));
    }
    out
}

pub fn emit_poisson_gap_csv(rows: &[PoissonGapRow], path: &Path) -> Result<()> {
    std::fs::write(path, poisson_gap_csv(rows))
        .with_context(|| format!("writing {}", path.display()))
}

pub fn bin_approx_csv(rows: &[BinApproxRow]) -> String {
    let mut out = String::from("n,N,d1,residual\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.n, r.n_steps, r.d1, r.residual));
    }
    out
}

pub fn emit_bin_approx_csv(rows: &[BinApproxRow], path: &Path) -> Result<()> {
    std::fs::write(path, bin_approx_csv(rows))
        .with_context(|| format!("writing {}", path.display()))
}

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;

/// A log-log line chart of `(n, value)` points. Values are clamped below
/// at `1e-12` so a zero cannot break the log scale.
pub fn trend_svg(points: &[(usize, f64)], title: &str, y_label: &str) -> Result<String> {
    if points.is_empty() {
        bail!("refusing to draw a chart with no points");
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).log10()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.max(1e-12).log10()).collect();
    let (mut x_lo, mut x_hi) = min_max(&xs);
    let (mut y_lo, mut y_hi) = min_max(&ys);
    if x_hi - x_lo < 1e-9 {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_hi - y_lo < 1e-9 {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let plot_w = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| {
        (
            MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w,
            MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h,
        )
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n",
        SVG_WIDTH / 2.0,
        xml_escape(title)
    ));
    // frame
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    // x ticks at the data's n values
    for (k, (n, _)) in points.iter().enumerate() {
        let (px, _) = to_px(xs[k], y_lo);
        svg.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{n}</text>\n",
            MARGIN_TOP + plot_h + 20.0
        ));
    }
    // y ticks at powers of ten inside the range
    let mut decade = y_lo.floor() as i64;
    while (decade as f64) <= y_hi {
        if (decade as f64) >= y_lo {
            let (_, py) = to_px(x_lo, decade as f64);
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{MARGIN_LEFT}\" y2=\"{py:.1}\" stroke=\"black\"/>\n",
                MARGIN_LEFT - 5.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e{decade}</text>\n",
                MARGIN_LEFT - 8.0,
                py + 4.0
            ));
        }
        decade += 1;
    }
    // axis labels
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">n</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        SVG_HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        xml_escape(y_label)
    ));
    // the trend line and its markers
    let pixel_points: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let (px, py) = to_px(x, y);
            format!("{px:.2},{py:.2}")
        })
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n",
        pixel_points.join(" ")
    ));
    for p in &pixel_points {
        let (px, py) = p.split_once(',').unwrap();
        svg.push_str(&format!("<circle cx=\"{px}\" cy=\"{py}\" r=\"3\" fill=\"#1f77b4\"/>\n"));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_trend_svg(
    points: &[(usize, f64)],
    title: &str,
    y_label: &str,
    path: &Path,
) -> Result<()> {
    let svg = trend_svg(points, title, y_label)?;
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
