//! Self-contained SVG: decay of the maximal power value on both domains
//! (log scale) above scatter plots of the selected points.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::artifacts::{read_trace_csv, TraceTable};
use super::ExperimentError;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 760.0;
const SUPER_COLOR: &str = "#d000d0";
const SUB_COLOR: &str = "#0030e0";

struct Frame {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

/// Reads `trace_super.csv` and `trace_sub.csv` from `dir` and writes `plot.svg` there.
pub fn emit_plot(dir: &Path) -> Result<PathBuf, ExperimentError> {
    let sup = read_trace_csv(&dir.join("trace_super.csv"))?;
    let sub = read_trace_csv(&dir.join("trace_sub.csv"))?;
    let svg = render(&sup, &sub);
    let path = dir.join("plot.svg");
    fs::write(&path, svg).map_err(|e| ExperimentError::io(&path, e))?;
    Ok(path)
}

pub fn render(sup: &TraceTable, sub: &TraceTable) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    decay_panel(
        &mut s,
        &Frame {
            x: 80.0,
            y: 30.0,
            w: 840.0,
            h: 320.0,
        },
        sup,
        sub,
    );
    scatter_panel(
        &mut s,
        "scatter-sub",
        "selected points, subdomain",
        &Frame {
            x: 80.0,
            y: 420.0,
            w: 380.0,
            h: 300.0,
        },
        &sub.points(),
        SUB_COLOR,
    );
    scatter_panel(
        &mut s,
        "scatter-super",
        "selected points, domain",
        &Frame {
            x: 540.0,
            y: 420.0,
            w: 380.0,
            h: 300.0,
        },
        &sup.points(),
        SUPER_COLOR,
    );
    s.push_str("</svg>\n");
    s
}

fn decay_panel(s: &mut String, f: &Frame, sup: &TraceTable, sub: &TraceTable) {
    let positive = sup.sigma.iter().chain(&sub.sigma).copied().filter(|v| *v > 0.0 && v.is_finite());
    let (lo, hi) = positive.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (1e-16, 1.0) };
    let d_lo = lo.log10().floor();
    let d_hi = hi.log10().ceil().max(d_lo + 1.0);
    let n_max = sup.steps.iter().chain(&sub.steps).copied().max().unwrap_or(1).max(1) as f64;
    let px = |n: f64| f.x + f.w * n / n_max;
    let py = |v: f64| {
        let l = if v > 0.0 { v.log10() } else { d_lo };
        f.y + f.h * (d_hi - l.max(d_lo)) / (d_hi - d_lo)
    };

    let _ = writeln!(s, r#"<g id="decay">"#);
    let _ = writeln!(
        s,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        f.x, f.y, f.w, f.h
    );
    let mut d = d_lo;
    let step = ((d_hi - d_lo) / 10.0).ceil().max(1.0);
    while d <= d_hi {
        let y = py(10f64.powf(d));
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"##,
            f.x,
            f.x + f.w,
            f.x - 6.0,
            y + 4.0,
            d as i64
        );
        d += step;
    }
    for k in 0..=5 {
        let n = (n_max * k as f64 / 5.0).round();
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(n),
            f.y + f.h + 16.0,
            n as u64
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">n</text>"#,
        f.x + f.w / 2.0,
        f.y + f.h + 34.0
    );
    for (id, label, t, color) in [
        ("curve-super", "domain", sup, SUPER_COLOR),
        ("curve-sub", "subdomain", sub, SUB_COLOR),
    ] {
        let pts: Vec<String> = t
            .steps
            .iter()
            .zip(&t.sigma)
            .map(|(&n, &v)| format!("{:.2},{:.2}", px(n as f64), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline id="{id}" data-label="{label}" data-samples="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.len(),
            pts.join(" ")
        );
    }
    for (i, (label, color)) in [("domain", SUPER_COLOR), ("subdomain", SUB_COLOR)].into_iter().enumerate() {
        let y = f.y + 18.0 + 18.0 * i as f64;
        let x = f.x + f.w - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            x + 24.0,
            x + 30.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, "</g>");
}

fn scatter_panel(s: &mut String, id: &str, title: &str, f: &Frame, pts: &[Vec<f64>], color: &str) {
    let coord = |p: &Vec<f64>, j: usize| p.get(j).copied().unwrap_or(0.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(coord(p, 0));
        x1 = x1.max(coord(p, 0));
        y0 = y0.min(coord(p, 1));
        y1 = y1.max(coord(p, 1));
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    // equal scaling on both axes
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = f.w.min(f.h) / span;
    let ox = f.x + (f.w - scale * (x1 - x0)) / 2.0;
    let oy = f.y + (f.h + scale * (y1 - y0)) / 2.0;

    let _ = writeln!(s, r#"<g id="{id}" data-samples="{}">"#, pts.len());
    let _ = writeln!(
        s,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="middle">{title}</text>"#,
        f.x,
        f.y,
        f.w,
        f.h,
        f.x + f.w / 2.0,
        f.y - 8.0
    );
    for p in pts {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{color}"/>"#,
            ox + scale * (coord(p, 0) - x0),
            oy - scale * (coord(p, 1) - y0)
        );
    }
    let _ = writeln!(s, "</g>");
}
