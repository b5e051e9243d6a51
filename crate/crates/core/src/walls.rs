//! Wall diagrams in the `(b, w)` plane, rendered as SVG 1.1.
//!
//! Every drawn line carries its exact gradient and intercept as `data-g` and
//! `data-c0` attributes; [`parse_svg`] reads them back. Pixel coordinates are
//! the only floating point values and are printed with fixed precision, so equal
//! inputs give identical bytes.

use std::fmt::Write as _;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::kgeom::{ChernData, GeometryParams, LineBW};
use crate::num::{fmt_rat, parse_rat, to_f64, Rat};
use crate::rank0direct::walls_report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LineKind {
    /// The final wall `l_f` (or the BMT line of a nonzero-rank class).
    Final,
    /// `l_v`: no wall lies above it.
    Bound,
    Wall,
}

impl LineKind {
    fn tag(self) -> &'static str {
        match self {
            LineKind::Final => "final",
            LineKind::Bound => "bound",
            LineKind::Wall => "wall",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "final" => Some(LineKind::Final),
            "bound" => Some(LineKind::Bound),
            "wall" => Some(LineKind::Wall),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramLine {
    pub kind: LineKind,
    pub g: Rat,
    pub c0: Rat,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    pub class: ChernData,
    pub lines: Vec<DiagramLine>,
    /// Labelled projections `Pi(E)`.
    pub points: Vec<(String, Rat, Rat)>,
}

fn sloped(line: &LineBW) -> Result<(Rat, Rat)> {
    match line {
        LineBW::Sloped { g, c0 } => Ok((g.clone(), c0.clone())),
        LineBW::Vertical { .. } => Err(Error::DegenerateLine),
    }
}

/// Lines and points for `v`: for rank 0, `l_f`, `l_v` and every wall from the
/// Method I splittings; otherwise the BMT line through `Pi(v)`.
pub fn diagram(v: &ChernData, geom: &GeometryParams) -> Result<Diagram> {
    let mut lines = Vec::new();
    let mut points = Vec::new();
    if v.r.is_zero() {
        let rep = walls_report(v, geom)?;
        let (g, c0) = sloped(&rep.lf)?;
        lines.push(DiagramLine { kind: LineKind::Final, g, c0, labels: vec!["l_f".into()] });
        let (g, c0) = sloped(&rep.lv)?;
        lines.push(DiagramLine { kind: LineKind::Bound, g, c0, labels: vec!["l_v".into()] });
        for (wall, sps) in &rep.walls {
            let (g, c0) = sloped(wall)?;
            let labels = sps.iter().map(|s| s.to_string()).collect();
            lines.push(DiagramLine { kind: LineKind::Wall, g, c0, labels });
            for sp in sps {
                for (name, f) in [("v1", sp.v1(geom)), ("v2", sp.v2(geom))] {
                    let (b, w) = geom.pi(&f)?;
                    let p = (format!("{name} {f}"), b, w);
                    if !points.contains(&p) {
                        points.push(p);
                    }
                }
            }
        }
    } else {
        let (g, c0) = sloped(&geom.bmt_line(v)?)?;
        lines.push(DiagramLine { kind: LineKind::Final, g, c0, labels: vec!["BMT line".into()] });
        let (b, w) = geom.pi(v)?;
        points.push((format!("{v}"), b, w));
    }
    Ok(Diagram { class: v.clone(), lines, points })
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;

struct View {
    b0: f64,
    b1: f64,
    w0: f64,
    w1: f64,
}

impl View {
    fn x(&self, b: f64) -> f64 {
        MARGIN + (b - self.b0) / (self.b1 - self.b0) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, w: f64) -> f64 {
        HEIGHT - MARGIN - (w - self.w0) / (self.w1 - self.w0) * (HEIGHT - 2.0 * MARGIN)
    }

    /// The `b`-interval where `w = g b + c0` stays inside the view.
    fn clip(&self, g: f64, c0: f64) -> Option<(f64, f64)> {
        let (mut lo, mut hi) = (self.b0, self.b1);
        if g == 0.0 {
            if c0 < self.w0 || c0 > self.w1 {
                return None;
            }
        } else {
            let (e0, e1) = ((self.w0 - c0) / g, (self.w1 - c0) / g);
            lo = lo.max(e0.min(e1));
            hi = hi.min(e0.max(e1));
        }
        (lo < hi).then_some((lo, hi))
    }
}

fn view(d: &Diagram) -> View {
    let mut bs: Vec<f64> = d.points.iter().map(|(_, b, _)| to_f64(b)).collect();
    for l in &d.lines {
        let line = LineBW::Sloped { g: l.g.clone(), c0: l.c0.clone() };
        if let Some((lo, hi)) = line.geometry().boundary_b_values {
            bs.push(lo.to_f64());
            bs.push(hi.to_f64());
        }
    }
    if bs.is_empty() {
        bs.push(0.0);
    }
    let lo = bs.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let hi = bs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let top = lo.abs().max(hi.abs());
    View { b0: lo, b1: hi, w0: 0.0, w1: top * top / 2.0 + 1.0 }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// The diagram as an SVG 1.1 document.
pub fn render_svg(d: &Diagram) -> String {
    let v = view(d);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-class="{}">"#,
        escape(&d.class.to_string())
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    // boundary of U: w = b^2/2
    let mut pts = String::new();
    for i in 0..=200 {
        let b = v.b0 + (v.b1 - v.b0) * f64::from(i) / 200.0;
        let _ = write!(pts, "{:.6},{:.6} ", v.x(b), v.y(b * b / 2.0));
    }
    let _ = writeln!(s, r#"<polyline data-kind="boundary" points="{}" fill="none" stroke="black"/>"#, pts.trim_end());
    for l in &d.lines {
        let (g, c0) = (to_f64(&l.g), to_f64(&l.c0));
        let (color, dash) = match l.kind {
            LineKind::Final => ("blue", ""),
            LineKind::Bound => ("gray", r#" stroke-dasharray="6,4""#),
            LineKind::Wall => ("red", ""),
        };
        let Some((ba, bb)) = v.clip(g, c0) else {
            // outside the drawing area: keep the exact data, draw nothing
            let _ = writeln!(s, r#"<line data-kind="{}" data-g="{}" data-c0="{}" x1="0" y1="0" x2="0" y2="0" visibility="hidden"/>"#, l.kind.tag(), fmt_rat(&l.g), fmt_rat(&l.c0));
            continue;
        };
        let _ = writeln!(
            s,
            r#"<line data-kind="{}" data-g="{}" data-c0="{}" x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="{color}"{dash}/>"#,
            l.kind.tag(),
            fmt_rat(&l.g),
            fmt_rat(&l.c0),
            v.x(ba),
            v.y(g * ba + c0),
            v.x(bb),
            v.y(g * bb + c0),
        );
        for (i, label) in l.labels.iter().enumerate() {
            let b = ba + (bb - ba) * 0.05;
            let _ = writeln!(
                s,
                r#"<text x="{:.6}" y="{:.6}" font-size="10" fill="{color}">{}</text>"#,
                v.x(b),
                v.y(g * b + c0) - 4.0 - 12.0 * i as f64,
                escape(label)
            );
        }
    }
    for (label, b, w) in &d.points {
        let (x, y) = (v.x(to_f64(b)), v.y(to_f64(w)));
        let _ = writeln!(s, r#"<circle data-b="{}" data-w="{}" cx="{x:.6}" cy="{y:.6}" r="3" fill="black"/>"#, fmt_rat(b), fmt_rat(w));
        let _ = writeln!(s, r#"<text x="{:.6}" y="{:.6}" font-size="10">{}</text>"#, x + 5.0, y - 5.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

fn attr<'a>(elem: &'a str, name: &str) -> Option<&'a str> {
    let key = format!(" {name}=\"");
    let start = elem.find(&key)? + key.len();
    let len = elem[start..].find('"')?;
    Some(&elem[start..start + len])
}

/// Kind, gradient and intercept of every `<line>` element.
pub fn parse_svg(svg: &str) -> Result<Vec<(LineKind, Rat, Rat)>> {
    let mut out = Vec::new();
    for chunk in svg.split("<line ").skip(1) {
        let elem = &chunk[..chunk.find("/>").ok_or_else(|| Error::Parse { line: 0, msg: "unterminated <line>".into() })?];
        let elem = format!(" {elem}");
        let elem = elem.as_str();
        let bad = |what: &str| Error::Parse { line: 0, msg: format!("<line> without a valid {what}") };
        let kind = attr(elem, "data-kind").and_then(LineKind::from_tag).ok_or_else(|| bad("data-kind"))?;
        let g = attr(elem, "data-g").and_then(parse_rat).ok_or_else(|| bad("data-g"))?;
        let c0 = attr(elem, "data-c0").and_then(parse_rat).ok_or_else(|| bad("data-c0"))?;
        out.push((kind, g, c0));
    }
    Ok(out)
}
