//! SVG figures for plane curves: the subdivision of the Newton polygon next
//! to the dual complex, with optional cycles and amoeba samples.

use std::fmt::Write;

use num_traits::ToPrimitive;
use trop_core::cycles::CycleFamily;
use trop_core::dualcomplex::DualComplex;
use trop_core::subdivision::RegularSubdivision;
use trop_core::{Error, Result};

const PANEL: f64 = 400.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 8] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#e377c2", "#8c564b"];

#[derive(Clone, Debug, Default)]
pub struct RenderOptions<'a> {
    pub cycles: Option<&'a CycleFamily>,
    /// Points in `Log_t` coordinates.
    pub samples: &'a [Vec<f64>],
    /// Clip box `[lo, hi]` for the complex panel; by default the bounding
    /// box of vertices and samples padded by one unit.
    pub window: Option<([f64; 2], [f64; 2])>,
}

/// Fixed three-decimal formatting with no negative zero.
fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" { "0.000".into() } else { s }
}

struct Frame {
    lo: [f64; 2],
    hi: [f64; 2],
    offset: f64,
}

impl Frame {
    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let inner = PANEL - 2.0 * MARGIN;
        let scale = inner / (self.hi[0] - self.lo[0]).max(self.hi[1] - self.lo[1]);
        (
            self.offset + MARGIN + (p[0] - self.lo[0]) * scale,
            PANEL - MARGIN - (p[1] - self.lo[1]) * scale,
        )
    }

    fn line(&self, svg: &mut String, a: [f64; 2], b: [f64; 2], style: &str) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(svg, r#"<line x1="{}" y1="{}" x2="{}" y2="{}" {style}/>"#, num(x1), num(y1), num(x2), num(y2));
    }
}

/// Clips the ray `p + s d`, `s >= 0`, to the box; `None` when it misses.
fn clip_ray(p: [f64; 2], d: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> Option<([f64; 2], [f64; 2])> {
    let (mut s0, mut s1) = (0.0_f64, f64::INFINITY);
    for k in 0..2 {
        if d[k] == 0.0 {
            if p[k] < lo[k] || p[k] > hi[k] {
                return None;
            }
        } else {
            let (a, b) = ((lo[k] - p[k]) / d[k], (hi[k] - p[k]) / d[k]);
            s0 = s0.max(a.min(b));
            s1 = s1.min(a.max(b));
        }
    }
    (s0 <= s1).then(|| ([p[0] + s0 * d[0], p[1] + s0 * d[1]], [p[0] + s1 * d[0], p[1] + s1 * d[1]]))
}

fn to2(v: &[f64]) -> [f64; 2] {
    [v[0], v[1]]
}

/// A deterministic SVG document; errors unless the complex is a plane curve.
pub fn render_svg(s: &RegularSubdivision, pi: &DualComplex, opts: &RenderOptions) -> Result<String> {
    if pi.n() != 1 {
        return Err(Error::Precondition(format!("rendering needs a plane curve, got n = {}", pi.n())));
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        2.0 * PANEL,
        PANEL,
        2.0 * PANEL,
        PANEL
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // left: the subdivision
    let pts: Vec<[f64; 2]> = s.points().iter().map(|p| [p.0[0] as f64, p.0[1] as f64]).collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let left = Frame { lo, hi, offset: 0.0 };
    let _ = writeln!(svg, r#"<g id="subdivision">"#);
    for e in s.faces_of_dim(1) {
        left.line(&mut svg, pts[e.support[0]], pts[*e.support.last().expect("edge")], r#"stroke="black" stroke-width="1.5""#);
    }
    for p in &pts {
        let (x, y) = left.map(*p);
        let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3" fill="black"/>"#, num(x), num(y));
    }
    let _ = writeln!(svg, "</g>");

    // right: the complex
    let pos: Vec<(usize, [f64; 2])> = pi
        .vertices()
        .into_iter()
        .map(|v| {
            let p = pi.vertex_position(v)?;
            Ok((v, [p[0].to_f64().unwrap_or(f64::NAN), p[1].to_f64().unwrap_or(f64::NAN)]))
        })
        .collect::<Result<_>>()?;
    let at = |v: usize| pos.iter().find(|(w, _)| *w == v).map(|(_, p)| *p).expect("vertex position");
    let (lo, hi) = match opts.window {
        Some(w) => w,
        None => {
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in pos.iter().map(|(_, p)| *p).chain(opts.samples.iter().map(|p| to2(p))) {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k] - 1.0);
                    hi[k] = hi[k].max(p[k] + 1.0);
                }
            }
            (lo, hi)
        }
    };
    let right = Frame { lo, hi, offset: PANEL };
    let segment = |e: usize| -> Option<([f64; 2], [f64; 2])> {
        let vs = pi.cell_vertices(e);
        if pi.cell(e).bounded {
            Some((at(vs[0]), at(vs[1])))
        } else {
            let d = pi.ray_direction(e)?;
            let d = [d[0].to_f64()?, d[1].to_f64()?];
            clip_ray(at(vs[0]), d, lo, hi)
        }
    };
    if let Some(family) = opts.cycles {
        let _ = writeln!(svg, r#"<g id="cycles">"#);
        for (k, entry) in family.entries.iter().enumerate() {
            let style = format!(r#"stroke="{}" stroke-width="7" stroke-opacity="0.45""#, PALETTE[k % PALETTE.len()]);
            for &e in &entry.enlarged.cells {
                if let Some((a, b)) = segment(e) {
                    right.line(&mut svg, a, b, &style);
                }
            }
        }
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(svg, r#"<g id="complex">"#);
    for e in pi.top_cells() {
        if let Some((a, b)) = segment(e) {
            let w = pi.edge_weight(e).unwrap_or(1);
            right.line(&mut svg, a, b, &format!(r#"stroke="black" stroke-width="{w}""#));
        }
    }
    for (_, p) in &pos {
        if (0..2).all(|k| lo[k] <= p[k] && p[k] <= hi[k]) {
            let (x, y) = right.map(*p);
            let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="2.5" fill="black"/>"#, num(x), num(y));
        }
    }
    let _ = writeln!(svg, "</g>");
    if !opts.samples.is_empty() {
        let _ = writeln!(svg, r##"<g id="samples" fill="#555555" fill-opacity="0.5">"##);
        for p in opts.samples.iter().map(|p| to2(p)) {
            if (0..2).all(|k| lo[k] <= p[k] && p[k] <= hi[k]) {
                let (x, y) = right.map(p);
                let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="1.2"/>"#, num(x), num(y));
            }
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rays_clip_to_the_box() {
        let (a, b) = clip_ray([0.0, 0.0], [1.0, 1.0], [-1.0, -1.0], [2.0, 3.0]).unwrap();
        assert_eq!((a, b), ([0.0, 0.0], [2.0, 2.0]));
        assert!(clip_ray([5.0, 0.0], [1.0, 0.0], [-1.0, -1.0], [2.0, 2.0]).is_none());
    }

    #[test]
    fn no_negative_zero() {
        assert_eq!(num(-0.0001), "0.000");
        assert_eq!(num(1.23456), "1.235");
    }
}
