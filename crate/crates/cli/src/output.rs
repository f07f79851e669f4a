//! Manifests, CSV tables and SVG plots.

use std::fs;
use std::path::Path;

use bernlab::experiments::{SweepResult, SweepRow};
use serde::Serialize;

use crate::commands::Failure;

pub const SWEEP_SCHEMA: &str = "bernlab-sweep/1";

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub conventions: &'static str,
    pub threads: usize,
    pub elapsed_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            tool: "bernlab",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            params,
            seed,
            conventions: bernlab::CONVENTIONS,
            threads: rayon::current_num_threads(),
            elapsed_seconds: 0.0,
        }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    manifest: &'a RunManifest,
    result: &'a T,
}

pub fn json_document<T: Serialize>(manifest: &RunManifest, result: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(&Document { manifest, result })
        .map_err(|e| Failure::Numerical(format!("cannot serialize output: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Numerical(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::Numerical(format!("cannot write {}: {e}", path.display())))
}

const SWEEP_COLUMNS: [&str; 12] = [
    "param",
    "n",
    "terms",
    "r",
    "lhs",
    "lhs_error",
    "norm",
    "scale",
    "ratio",
    "lambda",
    "lambda_admissible",
    "is_max",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn record(r: &SweepRow) -> Vec<String> {
    vec![
        r.param.to_string(),
        r.n.to_string(),
        opt(r.terms),
        opt(r.r),
        r.lhs.to_string(),
        opt(r.lhs_error),
        r.norm.to_string(),
        r.scale.to_string(),
        r.ratio.to_string(),
        opt(r.lambda),
        opt(r.lambda_admissible),
        r.is_max.to_string(),
    ]
}

/// Sweep table with a leading `#schema=` line. Floats use the shortest
/// round-trip representation, so equal results give equal bytes.
pub fn sweep_csv(res: &SweepResult) -> Result<Vec<u8>, Failure> {
    let mut out = format!(
        "#schema={SWEEP_SCHEMA};theorem={};family={};columns={}\n",
        res.config.theorem,
        res.config.family,
        SWEEP_COLUMNS.join("|")
    )
    .into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::Numerical(format!("cannot write CSV: {e}"));
    w.write_record(SWEEP_COLUMNS).map_err(fail)?;
    for r in &res.rows {
        w.write_record(record(r)).map_err(fail)?;
    }
    out.extend(w.into_inner().map_err(|e| Failure::Numerical(format!("cannot write CSV: {e}")))?);
    Ok(out)
}

/// Log–log plot of `lhs/norm` against `n` with the fitted curve.
pub fn sweep_svg(res: &SweepResult) -> String {
    let pts: Vec<(f64, f64)> = res
        .rows
        .iter()
        .filter(|r| r.lhs > 0.0 && r.norm > 0.0 && r.n > 1)
        .map(|r| ((r.n as f64).log10(), (r.lhs / r.norm).log10()))
        .collect();
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\">theorem {} / {}: lhs/norm vs n (log-log)</text>\n",
        w / 2.0,
        res.config.theorem,
        res.config.family
    );
    if pts.is_empty() {
        svg.push_str("<text x=\"320\" y=\"210\" text-anchor=\"middle\">no positive values</text>\n</svg>\n");
        return svg;
    }
    let fit_pts: Vec<(f64, f64)> = res
        .fit
        .as_ref()
        .map(|fit| {
            let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
            (0..=64)
                .map(|i| {
                    let x = lo + (hi - lo) * i as f64 / 64.0;
                    (x, fit.predict(10f64.powf(x)).log10())
                })
                .filter(|p| p.1.is_finite())
                .collect()
        })
        .unwrap_or_default();
    let all = pts.iter().chain(&fit_pts);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    svg.push_str(&format!(
        "<line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">log10 n</text>\n\
         <text x=\"15\" y=\"{}\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">log10(lhs/norm)</text>\n",
        h - pad,
        w - pad,
        h - pad,
        h - pad,
        w / 2.0,
        h - 15.0,
        h / 2.0,
        h / 2.0
    ));
    for (x, label) in [(x0, x0), (x1, x1)] {
        svg.push_str(&format!("<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{label:.2}</text>\n", sx(x), h - pad + 16.0));
    }
    for (y, label) in [(y0, y0), (y1, y1)] {
        svg.push_str(&format!("<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{label:.2}</text>\n", pad - 4.0, sy(y)));
    }
    if !fit_pts.is_empty() {
        let path: Vec<String> = fit_pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
    }
    for &(x, y) in &pts {
        svg.push_str(&format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"#2c3e50\"/>\n", sx(x), sy(y)));
    }
    svg.push_str("</svg>\n");
    svg
}
