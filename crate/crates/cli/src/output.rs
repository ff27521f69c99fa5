//! Artifact writers.
//!
//! CSV: header row, comma separator, `\n` line ends, `.` decimal point.
//! Numbers are printed with six decimals and trailing zeros removed, keeping
//! at least one digit after the point (`10` → `10.0`, `10/3` → `3.333333`).
//! Magnitudes outside `[1e-4, 1e15)` use Rust's shortest exponent form
//! (`1e-8`), and non-finite values print as `NaN`, `inf`, `-inf`.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::report::{Cell, ExperimentReport, Plot, Table};

pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0.0".into();
    }
    let a = v.abs();
    if !(1e-4..1e15).contains(&a) {
        return format!("{v:e}");
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0');
    let s = if s.ends_with('.') { format!("{s}0") } else { s.to_string() };
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

pub fn table_to_csv(t: &Table) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(&t.columns).expect("in-memory write");
    for row in &t.rows {
        w.write_record(row.iter().map(|c| match c {
            Cell::Num(v) => format_number(*v),
            Cell::Text(s) => s.clone(),
        }))
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn axis_value(v: f64, log: bool) -> Option<f64> {
    let x = if log { v.log10() } else { v };
    x.is_finite().then_some(x)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Minimal SVG line chart: frame, axis extremes, one polyline per series.
pub fn plot_to_svg(p: &Plot) -> String {
    let pts: Vec<Vec<(f64, f64)>> = p
        .lines
        .iter()
        .map(|(_, l)| {
            l.iter()
                .filter_map(|&(x, y)| Some((axis_value(x, p.log_x)?, axis_value(y, p.log_y)?)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y0 -= 0.5;
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let tick = |v: f64, log: bool| if log { format!("1e{v:.1}") } else { format_number(v) };

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    s += &format!("<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n");
    s += &format!(
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    s += &format!("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", W / 2.0, escape(&p.title));
    s += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", W / 2.0, H - 12.0, escape(&p.x_label));
    s += &format!(
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        H / 2.0,
        H / 2.0,
        escape(&p.y_label)
    );
    s += &format!("<text x=\"{PAD}\" y=\"{}\" text-anchor=\"start\">{}</text>\n", H - PAD + 16.0, tick(x0, p.log_x));
    s += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", W - PAD, H - PAD + 16.0, tick(x1, p.log_x));
    s += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", PAD - 4.0, H - PAD, tick(y0, p.log_y));
    s += &format!("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", PAD - 4.0, PAD + 10.0, tick(y1, p.log_y));
    for (k, ((label, _), line)) in p.lines.iter().zip(&pts).enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let coords: Vec<String> = line.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        s += &format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            coords.join(" ")
        );
        s += &format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" fill=\"{colour}\">{}</text>\n",
            W - PAD - 4.0,
            PAD + 16.0 + 14.0 * k as f64,
            escape(label)
        );
    }
    s += "</svg>\n";
    s
}

/// Wall-clock data, kept apart from `report.json` so the report stays
/// bit-identical across runs.
#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub scenario: String,
    pub wall_clock_seconds: f64,
    pub ceiling_seconds: f64,
    pub within_ceiling: bool,
}

pub fn report_json(r: &ExperimentReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes") + "\n"
}

/// Writes `report.json`, `timing.json`, one CSV per table and one SVG per plot.
pub fn write_artifacts(dir: &Path, r: &ExperimentReport, timing: &Timing) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report_json(r))?;
    fs::write(
        dir.join("timing.json"),
        serde_json::to_string_pretty(timing).expect("timing serializes") + "\n",
    )?;
    for t in &r.tables {
        fs::write(dir.join(format!("{}.csv", t.name)), table_to_csv(t))?;
    }
    for p in &r.plots {
        fs::write(dir.join(format!("{}.svg", p.name)), plot_to_svg(p))?;
    }
    Ok(())
}
