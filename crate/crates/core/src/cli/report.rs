//! Error report rows, CSV emission and parsing, and the log-log SVG plot.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "epsilon,h,tau,scheme,reference,linf_error,wiener_error,runtime_s,theta,chi";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub epsilon: f64,
    pub h: f64,
    pub tau: f64,
    pub scheme: String,
    /// Reference label, or `failed: <reason>` for a cell that did not run.
    pub reference: String,
    pub linf_error: f64,
    pub wiener_error: f64,
    #[serde(rename = "runtime_s")]
    pub runtime_seconds: f64,
    #[serde(rename = "theta")]
    pub stability_theta: f64,
    pub chi: Option<u8>,
}

impl Row {
    pub fn failed(&self) -> bool {
        self.reference.starts_with("failed")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<Row>,
}

impl ErrorReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failed()).count()
    }

    /// Rows for one mesh size, in input order.
    pub fn for_h(&self, h: f64) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.h == h).collect()
    }

    /// Distinct mesh sizes in order of first appearance.
    pub fn hs(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.h) {
                out.push(r.h);
            }
        }
        out
    }
}

pub fn to_csv(report: &ErrorReport) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in &report.rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(format!("{CSV_HEADER}\n{}", String::from_utf8(body).expect("csv output is utf-8")))
}

pub fn parse_csv(text: &str) -> Result<ErrorReport> {
    if text.lines().next() != Some(CSV_HEADER) {
        return Err(Error::Config("unexpected CSV header".into()));
    }
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let rows = rd
        .deserialize()
        .collect::<std::result::Result<Vec<Row>, _>>()
        .map_err(|e| Error::Config(format!("bad CSV row: {e}")))?;
    Ok(ErrorReport { rows })
}

pub fn emit_csv(report: &ErrorReport, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(report)?)?;
    Ok(())
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 70.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn decades(lo: f64, hi: f64) -> (i32, i32) {
    let a = lo.log10().floor() as i32;
    let b = (hi.log10().ceil() as i32).max(a + 1);
    (a, b)
}

/// Log-log plot of `linf_error` against `epsilon`, one polyline per `h`.
pub fn to_svg(report: &ErrorReport) -> String {
    let pts: Vec<&Row> =
        report.rows.iter().filter(|r| !r.failed() && r.linf_error > 0.0 && r.linf_error.is_finite()).collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let (ex, ey) = if pts.is_empty() {
        ((-4, -1), (-6, 0))
    } else {
        let fold = |f: fn(&Row) -> f64| {
            pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(f(r)), b.max(f(r))))
        };
        let (xl, xh) = fold(|r| r.epsilon);
        let (yl, yh) = fold(|r| r.linf_error);
        (decades(xl, xh), decades(yl, yh))
    };
    let px = |x: f64| PAD + (x.log10() - ex.0 as f64) / (ex.1 - ex.0) as f64 * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y.log10() - ey.0 as f64) / (ey.1 - ey.0) as f64 * (H - 2.0 * PAD);
    for d in ex.0..=ex.1 {
        let x = px(10f64.powi(d));
        let _ = writeln!(s, "<line x1=\"{x:.2}\" y1=\"{PAD}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#dddddd\"/>", H - PAD);
        let _ = writeln!(s, "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">1e{d}</text>", H - PAD + 18.0);
    }
    for d in ey.0..=ey.1 {
        let y = py(10f64.powi(d));
        let _ = writeln!(s, "<line x1=\"{PAD}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>", W - PAD);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">1e{d}</text>", PAD - 6.0, y + 4.0);
    }
    let _ = writeln!(
        s,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">epsilon</text>", W / 2.0, H - 20.0);
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">max error</text>",
        H / 2.0,
        H / 2.0
    );
    let mut hs: Vec<f64> = Vec::new();
    for r in &pts {
        if !hs.contains(&r.h) {
            hs.push(r.h);
        }
    }
    for (i, h) in hs.iter().enumerate() {
        let mut line: Vec<&&Row> = pts.iter().filter(|r| r.h == *h).collect();
        line.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        let coords: Vec<String> =
            line.iter().map(|r| format!("{:.2},{:.2}", px(r.epsilon), py(r.linf_error))).collect();
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            s,
            "<polyline data-h=\"{h}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        );
        let ly = PAD + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{ly}\" fill=\"{color}\">h = {h}</text>", W - PAD - 80.0);
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(report: &ErrorReport, path: &Path) -> Result<()> {
    std::fs::write(path, to_svg(report))?;
    Ok(())
}
