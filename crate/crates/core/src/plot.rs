//! Minimal SVG output: axes plus polylines.
//!
//! Points are written in data coordinates with 17 significant digits and
//! mapped to the canvas by a group transform, so the plotted values can be
//! read back exactly with [`read_polylines`].

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fmt17;
use crate::pick::{eigencurves, RationalPickFunction};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// One named curve, possibly broken into several segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub segments: Vec<Vec<(f64, f64)>>,
}

fn bounds(series: &[Series]) -> Option<(f64, f64, f64, f64)> {
    let pts = series.iter().flat_map(|s| s.segments.iter().flatten());
    let mut b: Option<(f64, f64, f64, f64)> = None;
    for &(x, y) in pts {
        if !(x.is_finite() && y.is_finite()) {
            continue;
        }
        b = Some(match b {
            None => (x, x, y, y),
            Some((x0, x1, y0, y1)) => (x0.min(x), x1.max(x), y0.min(y), y1.max(y)),
        });
    }
    b
}

/// Renders the series with the coordinate axes through the origin.
pub fn render(title: &str, series: &[Series]) -> Result<String> {
    let (mut x0, mut x1, mut y0, mut y1) = bounds(series).ok_or_else(|| Error::Domain("nothing to plot".into()))?;
    if x1 - x0 == 0.0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 - y0 == 0.0 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0);
    let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0);
    let tx = MARGIN - sx * x0;
    let ty = HEIGHT - MARGIN + sy * y0;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g transform="matrix({} 0 0 {} {} {})" fill="none">"#, fmt17(sx), fmt17(-sy), fmt17(tx), fmt17(ty));
    let axis = r##"stroke="#888" stroke-width="1" vector-effect="non-scaling-stroke""##;
    if y0 <= 0.0 && 0.0 <= y1 {
        let _ = writeln!(s, r#"<line class="axis" x1="{}" y1="0" x2="{}" y2="0" {axis}/>"#, fmt17(x0), fmt17(x1));
    }
    if x0 <= 0.0 && 0.0 <= x1 {
        let _ = writeln!(s, r#"<line class="axis" x1="0" y1="{}" x2="0" y2="{}" {axis}/>"#, fmt17(y0), fmt17(y1));
    }
    for (k, ser) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        for seg in ser.segments.iter().filter(|seg| seg.len() >= 2) {
            let pts: Vec<String> = seg.iter().map(|&(x, y)| format!("{},{}", fmt17(x), fmt17(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline class="curve" data-label="{}" points="{}" stroke="{color}" stroke-width="1.5" vector-effect="non-scaling-stroke"/>"#,
                escape(&ser.label),
                pts.join(" ")
            );
        }
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

/// Boundary eigenvalue branches of `F` on `n` equispaced points of `[a, b]`;
/// branches are broken at poles.
pub fn eigencurve_series(f: &RationalPickFunction, a: f64, b: f64, n: usize) -> Result<Vec<Series>> {
    if !(a < b && a.is_finite() && b.is_finite()) || n < 2 {
        return Err(Error::Domain(format!("need a < b and at least 2 points, got [{a}, {b}] with {n}")));
    }
    let xs: Vec<f64> = (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect();
    let mut series: Vec<Series> = (0..f.n).map(|j| Series { label: format!("eigenvalue {}", j + 1), segments: vec![vec![]] }).collect();
    for (x, ev) in xs.iter().zip(eigencurves(f, &xs)) {
        for (j, s) in series.iter_mut().enumerate() {
            let last = s.segments.last_mut().expect("nonempty");
            match &ev {
                Some(ev) => last.push((*x, ev[j])),
                None if !last.is_empty() => s.segments.push(vec![]),
                None => {}
            }
        }
    }
    Ok(series)
}

pub fn eigencurve_svg(f: &RationalPickFunction, a: f64, b: f64, n: usize) -> Result<String> {
    render("Boundary eigenvalues", &eigencurve_series(f, a, b, n)?)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn attr<'a>(tag: &'a str, name: &str) -> Option<&'a str> {
    let key = format!(" {name}=\"");
    let start = tag.find(&key)? + key.len();
    let len = tag[start..].find('"')?;
    Some(&tag[start..start + len])
}

/// Reads back `(label, points)` of every curve polyline.
pub fn read_polylines(svg: &str) -> Result<Vec<(String, Vec<(f64, f64)>)>> {
    let mut out = Vec::new();
    for chunk in svg.split("<polyline").skip(1) {
        let tag = &chunk[..chunk.find("/>").ok_or_else(|| Error::Parse("unterminated polyline".into()))?];
        let label = attr(tag, "data-label").unwrap_or_default().to_string();
        let pts = attr(tag, "points").ok_or_else(|| Error::Parse("polyline without points".into()))?;
        let parsed = pts
            .split_whitespace()
            .map(|p| {
                let (x, y) = p.split_once(',').ok_or_else(|| Error::Parse(format!("bad point {p}")))?;
                let x = x.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?;
                let y = y.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?;
                Ok((x, y))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((label, parsed));
    }
    Ok(out)
}
