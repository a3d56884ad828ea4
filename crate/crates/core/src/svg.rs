//! SVG 1.1 drawings of planar instances and their solutions.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::geometry::polygon::{self, P2};
use crate::io::{HalfspaceDoc, Instance, ResultDoc};

const WIDTH: f64 = 640.0;
const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2"];

struct View {
    min: P2,
    max: P2,
    scale: f64,
}

impl View {
    fn px(&self, p: P2) -> (f64, f64) {
        ((p[0] - self.min[0]) * self.scale, (self.max[1] - p[1]) * self.scale)
    }

    fn height(&self) -> f64 {
        (self.max[1] - self.min[1]) * self.scale
    }

    fn rect(&self) -> Vec<P2> {
        vec![
            self.min,
            [self.max[0], self.min[1]],
            self.max,
            [self.min[0], self.max[1]],
        ]
    }
}

/// Draws the bodies, the solution line(s) or circle, the shaded solution
/// region, and the achieved fraction of each body.
pub fn render_svg(inst: &Instance, result: &ResultDoc) -> Result<String> {
    if inst.dimension != 2 {
        return Err(Error::UnsupportedDimension(inst.dimension));
    }
    let hulls: Vec<Vec<P2>> = inst
        .bodies
        .iter()
        .map(|b| {
            let pts: Vec<P2> = b.vertices.iter().map(|v| [v[0], v[1]]).collect();
            polygon::convex_hull(&pts, 0.0)
        })
        .collect();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in hulls.iter().flatten() {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if let Some(s) = &result.sphere {
        for k in 0..2 {
            lo[k] = lo[k].min(s.center[k] - s.radius);
            hi[k] = hi[k].max(s.center[k] + s.radius);
        }
    }
    let pad = 0.08 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1.0);
    let view = View {
        min: [lo[0] - pad, lo[1] - pad],
        max: [hi[0] + pad, hi[1] + pad],
        scale: WIDTH / (hi[0] - lo[0] + 2.0 * pad),
    };

    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{:.0}" height="{:.0}" viewBox="0 0 {:.2} {:.2}">"#,
        WIDTH,
        view.height().ceil(),
        WIDTH,
        view.height()
    )
    .unwrap();
    writeln!(out, r##"<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>"##).unwrap();

    let halfspaces: Vec<&HalfspaceDoc> = result
        .halfspace
        .iter()
        .chain(result.halfspaces.iter().flatten())
        .collect();
    for h in &halfspaces {
        let mut region = Vec::new();
        polygon::clip_halfplane(&view.rect(), [h.normal[0], h.normal[1]], h.offset, &mut region);
        if region.len() >= 3 {
            writeln!(out, r##"<path d="{}" fill="#9ecae1" fill-opacity="0.25" stroke="none"/>"##, path(&view, &region)).unwrap();
        }
    }
    if let Some(s) = &result.sphere {
        let (cx, cy) = view.px([s.center[0], s.center[1]]);
        let r = s.radius * view.scale;
        writeln!(
            out,
            r##"<path d="M {:.2} {:.2} A {r:.2} {r:.2} 0 1 0 {:.2} {:.2} A {r:.2} {r:.2} 0 1 0 {:.2} {:.2} Z" fill="#9ecae1" fill-opacity="0.25" stroke="none"/>"##,
            cx - r,
            cy,
            cx + r,
            cy,
            cx - r,
            cy
        )
        .unwrap();
    }

    for (i, (hull, body)) in hulls.iter().zip(&inst.bodies).enumerate() {
        let pts: Vec<String> = hull
            .iter()
            .map(|&p| {
                let (x, y) = view.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(
            out,
            r#"<polygon points="{}" fill="{}" fill-opacity="0.45" stroke="{}" stroke-width="1.5"/>"#,
            pts.join(" "),
            PALETTE[i % PALETTE.len()],
            PALETTE[i % PALETTE.len()]
        )
        .unwrap();
        let c = polygon::centroid(hull).unwrap_or(hull[0]);
        let (x, y) = view.px(c);
        let label = match result.per_body_fractions.get(i) {
            Some(f) => format!("{} {:.4}", escape(&body.name), f),
            None => escape(&body.name),
        };
        writeln!(
            out,
            r##"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" fill="#222222">{label}</text>"##
        )
        .unwrap();
    }

    for h in &halfspaces {
        if let Some((a, b)) = chord(&view, h) {
            writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#08519c" stroke-width="2"/>"##,
                a.0, a.1, b.0, b.1
            )
            .unwrap();
        }
    }
    if let Some(s) = &result.sphere {
        let (cx, cy) = view.px([s.center[0], s.center[1]]);
        writeln!(
            out,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#08519c" stroke-width="2"/>"##,
            s.radius * view.scale
        )
        .unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}

fn path(view: &View, region: &[P2]) -> String {
    let mut d = String::new();
    for (k, &p) in region.iter().enumerate() {
        let (x, y) = view.px(p);
        write!(d, "{}{x:.2} {y:.2} ", if k == 0 { "M " } else { "L " }).unwrap();
    }
    d.push('Z');
    d
}

// The visible part of {<v, x> = t}, from the view rectangle's edges.
fn chord(view: &View, h: &HalfspaceDoc) -> Option<((f64, f64), (f64, f64))> {
    let n = [h.normal[0], h.normal[1]];
    let rect = view.rect();
    let dir = [-n[1], n[0]];
    let mut hits: Vec<P2> = Vec::new();
    for i in 0..4 {
        let (a, b) = (rect[i], rect[(i + 1) % 4]);
        let sa = n[0] * a[0] + n[1] * a[1] - h.offset;
        let sb = n[0] * b[0] + n[1] * b[1] - h.offset;
        if sa == 0.0 {
            hits.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let s = sa / (sa - sb);
            hits.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        }
    }
    let key = |p: &P2| dir[0] * p[0] + dir[1] * p[1];
    let lo = hits.iter().min_by(|p, q| key(p).total_cmp(&key(q)))?;
    let hi = hits.iter().max_by(|p, q| key(p).total_cmp(&key(q)))?;
    Some((view.px(*lo), view.px(*hi)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halfspace::Engine;
    use crate::io::{parse_instance, Mode, SphereDoc, Status};

    fn two_squares() -> Instance {
        parse_instance(
            r#"{"dimension": 2, "mode": "halfspace", "alpha": [0.5, 0.5], "bodies": [
                {"name": "A", "vertices": [[0,0],[1,0],[1,1],[0,1]]},
                {"name": "B", "vertices": [[3,0],[4,0],[4,1],[3,1]]}]}"#,
        )
        .unwrap()
    }

    fn count(svg: &str, tag: &str) -> usize {
        svg.matches(&format!("<{tag} ")).count()
    }

    #[test]
    fn halfspace_drawing() {
        let inst = two_squares();
        let mut doc = ResultDoc::empty(Status::Success, Mode::Halfspace, Engine::Hybrid, 42);
        doc.halfspace = Some(HalfspaceDoc {
            normal: vec![0.0, 1.0],
            offset: 0.5,
            per_body_fractions: None,
            orientation_det: None,
        });
        doc.per_body_fractions = vec![0.5, 0.5];
        let svg = render_svg(&inst, &doc).unwrap();
        assert_eq!(count(&svg, "polygon"), 2);
        assert_eq!(count(&svg, "line"), 1);
        assert_eq!(count(&svg, "circle"), 0);
        assert_eq!(svg, render_svg(&inst, &doc).unwrap());
    }

    #[test]
    fn sphere_drawing() {
        let inst = crate::generate::generate_instance(2, crate::generate::Kind::RadialSquares, Mode::Sphere, 0).unwrap();
        let mut doc = ResultDoc::empty(Status::Success, Mode::Sphere, Engine::Hybrid, 42);
        doc.sphere = Some(SphereDoc {
            center: vec![0.0, 0.0],
            radius: 3.0,
        });
        let svg = render_svg(&inst, &doc).unwrap();
        assert_eq!(count(&svg, "polygon"), 3);
        assert_eq!(count(&svg, "circle"), 1);
        assert_eq!(count(&svg, "line"), 0);
    }

    #[test]
    fn rejects_other_dimensions() {
        let mut inst = two_squares();
        inst.dimension = 3;
        let doc = ResultDoc::empty(Status::Success, Mode::Halfspace, Engine::Hybrid, 42);
        assert!(matches!(render_svg(&inst, &doc), Err(Error::UnsupportedDimension(3))));
    }
}
