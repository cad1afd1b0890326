//! Hand-written SVG for diagrams, samples and smoothed diagrams.

use std::fmt::Write;

use tdaband::pointprocess::SmoothedDiagram;
use tdaband::{PersistenceDiagram, PointCloud};

const SIZE: f64 = 420.0;
const MARGIN: f64 = 48.0;
const BAND_COLORS: [&str; 6] = ["#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Linear map of `[lo, hi]` onto the plot square.
#[derive(Clone, Copy)]
struct Frame {
    lo: f64,
    hi: f64,
}

impl Frame {
    fn new(lo: f64, hi: f64) -> Self {
        if hi > lo {
            Frame { lo, hi }
        } else {
            Frame { lo: lo - 0.5, hi: lo + 0.5 }
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo) / (self.hi - self.lo) * (SIZE - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        SIZE - MARGIN - (v - self.lo) / (self.hi - self.lo) * (SIZE - 2.0 * MARGIN)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (f.x(f.lo), f.x(f.hi));
    let (y0, y1) = (f.y(f.lo), f.y(f.hi));
    let _ = writeln!(
        out,
        r#"<path d="M {x0:.2} {y1:.2} L {x0:.2} {y0:.2} L {x1:.2} {y0:.2}" fill="none" stroke="black"/>"#
    );
    for (v, anchor) in [(f.lo, "start"), (f.hi, "end")] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{}</text>"#,
            f.x(v),
            y0 + 14.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
        x0 - 4.0,
        y1 + 4.0,
        fmt_tick(f.hi)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        SIZE - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.3}")
}

fn marker(out: &mut String, dim: usize, x: f64, y: f64) {
    match dim {
        0 => {
            let _ = writeln!(
                out,
                r#"<circle class="h0" cx="{x:.2}" cy="{y:.2}" r="3.5" fill="none" stroke="black"/>"#
            );
        }
        1 => {
            let _ = writeln!(
                out,
                r#"<polygon class="h1" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="none" stroke="red"/>"#,
                x,
                y - 4.5,
                x - 4.0,
                y + 3.0,
                x + 4.0,
                y + 3.0
            );
        }
        _ => {
            let _ = writeln!(
                out,
                r#"<rect class="h{dim}" x="{:.2}" y="{:.2}" width="7" height="7" fill="none" stroke="blue"/>"#,
                x - 3.5,
                y - 3.5
            );
        }
    }
}

/// Persistence diagram with the diagonal, one shaded band per `(label, c)`
/// covering points within L∞ distance `c` of the diagonal, and a legend.
///
/// Diagrams whose points sit below the diagonal (upper-level filtrations)
/// get their bands below it. Classes that never die are drawn on the top
/// edge, or at zero when they die at `-∞`.
pub fn diagram_svg(diagram: &PersistenceDiagram, bands: &[(String, f64)], title: &str) -> String {
    let upper_level = diagram.pairs().iter().any(|p| p.death < p.birth);
    let (lo, hi) = match diagram.finite_extent() {
        Some((lo, hi)) => (lo.min(0.0), hi),
        None => (0.0, 1.0),
    };
    let (lo, hi) = {
        let births = diagram.pairs().iter().map(|p| p.birth);
        let top = births.fold(hi, f64::max);
        (lo, top + 0.1 * (top - lo).max(1e-9))
    };
    let f = Frame::new(lo, hi);
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, "birth", "death");

    for (k, (label, c)) in bands.iter().enumerate() {
        let color = BAND_COLORS[k % BAND_COLORS.len()];
        let off = if upper_level { -2.0 * c } else { 2.0 * c };
        let corners = [(f.lo, f.lo), (f.hi, f.hi), (f.hi, f.hi + off), (f.lo, f.lo + off)];
        let pts: Vec<String> = corners
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", f.x(x), f.y(y.clamp(f.lo, f.hi))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polygon class="band" points="{}" fill="{color}" fill-opacity="0.18" stroke="{color}" stroke-width="0.8"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{color}">{} c={:.4}</text>"#,
            MARGIN + 6.0,
            MARGIN + 4.0 + 14.0 * k as f64,
            escape(label),
            c
        );
    }
    let _ = writeln!(
        out,
        r#"<line class="diagonal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray"/>"#,
        f.x(f.lo),
        f.y(f.lo),
        f.x(f.hi),
        f.y(f.hi)
    );
    for p in diagram.pairs() {
        let death = if p.death == f64::INFINITY {
            f.hi
        } else if p.death == f64::NEG_INFINITY {
            0.0
        } else {
            p.death
        };
        marker(&mut out, p.dim, f.x(p.birth), f.y(death));
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter plot of a 2-D sample, or a rug of a 1-D one. Higher
/// dimensions show the first two coordinates.
pub fn points_svg(cloud: &PointCloud, title: &str) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let bbox = cloud.bounding_box().unwrap_or_else(|_| vec![(0.0, 1.0)]);
    let lo = bbox.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let hi = bbox.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (hi - lo).max(1e-9);
    let f = Frame::new(lo - pad, hi + pad);
    if cloud.dim() == 1 {
        axes(&mut out, &f, "x", "");
        let y = f.y(f.lo);
        for p in cloud.points() {
            let x = f.x(p[0]);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{x:.2}" y2="{:.2}" stroke="black" stroke-opacity="0.3"/>"#,
                y - 8.0
            );
        }
    } else {
        axes(&mut out, &f, "x", "y");
        for p in cloud.points() {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="black"/>"#,
                f.x(p[0]),
                f.y(p[1])
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Polyline of `ys` against `xs`.
pub fn curve_svg(xs: &[f64], ys: &[f64], title: &str) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let lo = xs.iter().chain(ys).cloned().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = xs.iter().chain(ys).cloned().fold(f64::NEG_INFINITY, f64::max);
    let f = Frame::new(lo, hi);
    axes(&mut out, &f, "x", "density");
    let pts: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.2},{:.2}", f.x(x), f.y(y)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="black"/>"#,
        pts.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

/// Heat map of cell counts, darker for larger counts.
pub fn smoothed_svg(s: &SmoothedDiagram, title: &str) -> String {
    let mut out = String::new();
    open(&mut out, title);
    let (lo, hi) = s.window();
    let f = Frame::new(lo, hi);
    axes(&mut out, &f, "birth", "death");
    let max = s.counts().iter().copied().max().unwrap_or(0).max(1) as f64;
    let w = s.side();
    for i in 0..s.cells() {
        for j in 0..s.cells() {
            let c = s.count(i, j);
            if c == 0 {
                continue;
            }
            let (b0, d1) = (lo + i as f64 * w, lo + (j + 1) as f64 * w);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="black" fill-opacity="{:.3}"/>"#,
                f.x(b0),
                f.y(d1),
                f.x(b0 + w) - f.x(b0),
                f.y(d1 - w) - f.y(d1),
                0.1 + 0.9 * c as f64 / max
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<line class="diagonal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray"/>"#,
        f.x(lo),
        f.y(lo),
        f.x(hi),
        f.y(hi)
    );
    out.push_str("</svg>\n");
    out
}
