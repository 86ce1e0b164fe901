//! File output: JSON, CSV and SVG renderings of portraits and reports.

use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::convergence::{ConvergenceReport, Verdict};
use super::portrait::SpectralPortrait;
use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexPoint;
use crate::pseudo::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Svg,
}

impl FromStr for OutputFormat {
    type Err = SpeclabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "svg" => Ok(Self::Svg),
            other => Err(SpeclabError::Validation(format!(
                "unknown format {other:?} (expected json, csv or svg)"
            ))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
            Self::Svg => "svg",
        })
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| SpeclabError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| SpeclabError::io(path, e))
}

/// Pretty-printed JSON with full round-trip precision.
pub fn write_json(value: &impl Serialize, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_file(path, |w| {
        w.write_all(text.as_bytes())?;
        w.write_all(b"\n")
    })
}

pub fn emit_portrait(portrait: &SpectralPortrait, format: OutputFormat, path: &Path) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(portrait, path),
        OutputFormat::Csv => {
            let field = portrait
                .field()?
                .ok_or_else(|| SpeclabError::Validation("CSV output needs a resolvent-norm field".into()))?;
            write_file(path, |w| field.write_csv(w))
        }
        OutputFormat::Svg => {
            let svg = portrait_svg(portrait);
            write_file(path, |w| w.write_all(svg.as_bytes()))
        }
    }
}

pub fn emit_report(report: &ConvergenceReport, format: OutputFormat, path: &Path) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(report, path),
        OutputFormat::Csv => write_file(path, |w| {
            writeln!(w, "re,im,verdict,levels_matched,evidence")?;
            for f in &report.pollution_flags {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:?},{},\"{}\"",
                    f.point.re,
                    f.point.im,
                    f.verdict,
                    f.trajectory.len(),
                    f.evidence.replace('"', "'")
                )?;
            }
            Ok(())
        }),
        OutputFormat::Svg => {
            let svg = report_svg(report);
            write_file(path, |w| w.write_all(svg.as_bytes()))
        }
    }
}

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 60.0;

/// Maps the complex rectangle of a grid onto SVG pixel coordinates.
struct Canvas {
    grid: GridSpec,
    scale: f64,
    height: f64,
    out: String,
}

impl Canvas {
    fn new(grid: GridSpec, title: &str) -> Self {
        let (w, h) = (grid.x1 - grid.x0, grid.y1 - grid.y0);
        let scale = (WIDTH - 2.0 * MARGIN) / w;
        let height = h * scale + 2.0 * MARGIN;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.1}" viewBox="0 0 {WIDTH} {height:.1}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<defs><clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{:.2}" height="{:.2}"/></clipPath></defs>"#,
            w * scale,
            h * scale
        );
        Self {
            grid,
            scale,
            height,
            out,
        }
    }

    fn px(&self, z: ComplexPoint) -> (f64, f64) {
        (
            MARGIN + (z.re - self.grid.x0) * self.scale,
            self.height - MARGIN - (z.im - self.grid.y0) * self.scale,
        )
    }

    fn cells(&mut self, nodes: &[ComplexPoint], fill: &str) {
        let (cw, ch) = (self.grid.dx() * self.scale, self.grid.dy() * self.scale);
        let _ = writeln!(self.out, r#"<g fill="{fill}" stroke="none" clip-path="url(#plot)">"#);
        for &z in nodes {
            let (x, y) = self.px(z);
            let _ = writeln!(
                self.out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
                x - cw / 2.0,
                y - ch / 2.0,
                cw,
                ch
            );
        }
        let _ = writeln!(self.out, "</g>");
    }

    fn polyline(&mut self, pts: &[ComplexPoint], stroke: &str, width: f64) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&z| {
                let (x, y) = self.px(z);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.out,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}" clip-path="url(#plot)"/>"#,
            coords.join(" ")
        );
    }

    fn dots(&mut self, pts: &[ComplexPoint], fill: &str, r: f64) {
        let _ = writeln!(self.out, r#"<g fill="{fill}" clip-path="url(#plot)">"#);
        for &z in pts {
            let (x, y) = self.px(z);
            let _ = writeln!(self.out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}"/>"#);
        }
        let _ = writeln!(self.out, "</g>");
    }

    fn axes(&mut self) {
        let g = self.grid;
        let (x_lo, y_hi) = self.px(ComplexPoint::new(g.x0, g.y1));
        let (x_hi, y_lo) = self.px(ComplexPoint::new(g.x1, g.y0));
        let _ = writeln!(
            self.out,
            r#"<rect x="{x_lo:.2}" y="{y_hi:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x_hi - x_lo,
            y_lo - y_hi
        );
        for t in 0..=4 {
            let fx = g.x0 + (g.x1 - g.x0) * t as f64 / 4.0;
            let (x, _) = self.px(ComplexPoint::new(fx, g.y0));
            let _ = writeln!(
                self.out,
                r#"<line x1="{x:.2}" y1="{y_lo:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y_lo + 5.0,
                y_lo + 20.0,
                tick(fx)
            );
            let fy = g.y0 + (g.y1 - g.y0) * t as f64 / 4.0;
            let (_, y) = self.px(ComplexPoint::new(g.x0, fy));
            let _ = writeln!(
                self.out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{x_lo:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x_lo - 5.0,
                x_lo - 8.0,
                y + 4.0,
                tick(fy)
            );
        }
        let _ = writeln!(
            self.out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Re &#955;</text>"#,
            (x_lo + x_hi) / 2.0,
            y_lo + 40.0
        );
        let _ = writeln!(
            self.out,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">Im &#955;</text>"#,
            (y_lo + y_hi) / 2.0,
            (y_lo + y_hi) / 2.0
        );
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grey shade for level `i` of `count`, lightest for the largest eps.
fn grey(i: usize, count: usize) -> String {
    let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
    let v = (225.0 - 110.0 * t).round() as u8;
    format!("#{v:02x}{v:02x}{v:02x}")
}

fn bounding_grid(points: &[ComplexPoint]) -> GridSpec {
    let (mut x0, mut x1, mut y0, mut y1) = (-1.0f64, 1.0f64, -1.0f64, 1.0f64);
    if let Some(first) = points.first() {
        (x0, x1, y0, y1) = (first.re, first.re, first.im, first.im);
        for z in points {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1.0);
    GridSpec::new(x0 - pad, x1 + pad, y0 - pad, y1 + pad, 2, 2).expect("padded box is a valid grid")
}

/// Grey sublevel regions by eps, contour lines, the reference curve and
/// eigenvalue dots.
pub fn portrait_svg(p: &SpectralPortrait) -> String {
    let grid = p.grid.unwrap_or_else(|| {
        let mut pts = p.eigenvalues.clone();
        pts.extend(&p.reference_curve);
        bounding_grid(&pts)
    });
    let source = p.meta.get("source").and_then(|v| v.as_str()).unwrap_or("operator");
    let mut c = Canvas::new(grid, &format!("{source}, n = {}", p.n));
    if p.grid.is_some() {
        let count = p.contours.len();
        for (i, level) in p.contours.iter().enumerate() {
            let t = 1.0 / level.eps;
            let inside: Vec<ComplexPoint> = grid
                .nodes()
                .zip(&p.resnorm)
                .filter(|(_, v)| **v > t)
                .map(|(z, _)| z)
                .collect();
            c.cells(&inside, &grey(i, count));
        }
        for level in &p.contours {
            for line in &level.polylines {
                c.polyline(line, "#333333", 0.8);
            }
        }
    }
    if !p.reference_curve.is_empty() {
        let mut closed = p.reference_curve.clone();
        if p.meta
            .get("reference_closed")
            .and_then(|v| v.as_bool())
            .unwrap_or(false)
        {
            closed.push(closed[0]);
        }
        c.polyline(&closed, "#c03030", 1.2);
    }
    c.dots(&p.eigenvalues, "#1f4e9c", 2.2);
    c.axes();
    c.finish()
}

/// Eigenvalues of every truncation in the region, with the final level
/// coloured by verdict.
pub fn report_svg(r: &ConvergenceReport) -> String {
    let mut c = Canvas::new(r.region, &format!("{} convergence study", r.family.name()));
    let levels = r.per_n.len();
    for (i, level) in r.per_n.iter().enumerate().take(levels.saturating_sub(1)) {
        c.dots(&level.eigenvalues_in_k, &grey(i, levels), 1.6);
    }
    for (verdict, colour) in [
        (Verdict::Genuine, "#1f4e9c"),
        (Verdict::Polluting, "#c03030"),
        (Verdict::Undecided, "#d08a00"),
    ] {
        let pts: Vec<ComplexPoint> = r
            .pollution_flags
            .iter()
            .filter(|f| f.verdict == verdict)
            .map(|f| f.point)
            .collect();
        c.dots(&pts, colour, 2.6);
    }
    if r.pollution_flags.is_empty() {
        if let Some(last) = r.per_n.last() {
            c.dots(&last.eigenvalues_in_k, "#1f4e9c", 2.2);
        }
    }
    c.axes();
    c.finish()
}
