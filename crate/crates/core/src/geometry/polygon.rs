//! Planar fast paths: hulls, halfplane clipping, and exact polygon-disk
//! intersection areas. Polygons are convex and counter-clockwise.

use std::f64::consts::PI;

use crate::point::Point;

pub type P2 = [f64; 2];

fn cross(o: P2, a: P2, b: P2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn cross0(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dot0(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn to_p2(p: &Point) -> P2 {
    [p[0], p[1]]
}

/// Monotone-chain hull, counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[P2], eps: f64) -> Vec<P2> {
    let mut pts: Vec<P2> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= eps && (a[1] - b[1]).abs() <= eps);
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<P2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &P2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 {
                let n = hull.len();
                let a = hull[n - 2];
                let b = hull[n - 1];
                let len = ((b[0] - a[0]).hypot(b[1] - a[1])).max(f64::MIN_POSITIVE);
                if cross(a, b, p) / len <= eps {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

pub fn signed_area(poly: &[P2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

pub fn centroid(poly: &[P2]) -> Option<P2> {
    let n = poly.len();
    let a = signed_area(poly);
    if n < 3 || a == 0.0 {
        return None;
    }
    // shift to the first vertex for conditioning
    let o = poly[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = [poly[i][0] - o[0], poly[i][1] - o[1]];
        let q = [poly[(i + 1) % n][0] - o[0], poly[(i + 1) % n][1] - o[1]];
        let c = cross0(p, q);
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    Some([o[0] + cx / (6.0 * a), o[1] + cy / (6.0 * a)])
}

/// `poly ∩ {x : <n, x> <= c}` by one Sutherland-Hodgman pass.
pub fn clip_halfplane(poly: &[P2], n: P2, c: f64, out: &mut Vec<P2>) {
    out.clear();
    let len = poly.len();
    for i in 0..len {
        let a = poly[i];
        let b = poly[(i + 1) % len];
        let sa = dot0(n, a) - c;
        let sb = dot0(n, b) - c;
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            let s = sa / (sa - sb);
            out.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        }
    }
}

pub fn area_below(poly: &[P2], n: P2, c: f64) -> f64 {
    let mut buf = Vec::with_capacity(poly.len() + 2);
    clip_halfplane(poly, n, c, &mut buf);
    signed_area(&buf)
}

pub fn contains(poly: &[P2], p: P2, eps: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        cross(a, b, p) >= -eps * len
    })
}

// Signed area of disk(0, r) ∩ triangle(0, a, b).
fn triangle_disk_area(a: P2, b: P2, r: f64) -> f64 {
    let r2 = r * r;
    let sector = |u: P2, w: P2| 0.5 * r2 * cross0(u, w).atan2(dot0(u, w));
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = dot0(d, d);
    if qa == 0.0 {
        return 0.0;
    }
    let qb = dot0(a, d);
    let qc = dot0(a, a) - r2;
    let disc = qb * qb - qa * qc;
    if disc <= 0.0 {
        return sector(a, b);
    }
    let sq = disc.sqrt();
    let s1 = (-qb - sq) / qa;
    let s2 = (-qb + sq) / qa;
    if s2 <= 0.0 || s1 >= 1.0 {
        return sector(a, b);
    }
    let at = |s: f64| [a[0] + s * d[0], a[1] + s * d[1]];
    let p1 = if s1 > 0.0 { at(s1) } else { a };
    let p2 = if s2 < 1.0 { at(s2) } else { b };
    let mut area = 0.5 * cross0(p1, p2);
    if s1 > 0.0 {
        area += sector(a, p1);
    }
    if s2 < 1.0 {
        area += sector(p2, b);
    }
    area
}

/// Exact area of `poly ∩ disk(center, r)`.
pub fn disk_area(poly: &[P2], center: P2, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = [poly[i][0] - center[0], poly[i][1] - center[1]];
        let b = [
            poly[(i + 1) % n][0] - center[0],
            poly[(i + 1) % n][1] - center[1],
        ];
        s += triangle_disk_area(a, b, r);
    }
    s.max(0.0)
}

/// Angular intervals `(from, to)` (with `from < to`, radians) of the circle
/// `S(center, r)` lying inside `poly`.
pub fn circle_arcs(poly: &[P2], center: P2, r: f64, eps: f64) -> Vec<(f64, f64)> {
    let n = poly.len();
    let mut angles: Vec<f64> = Vec::new();
    for i in 0..n {
        let a = [poly[i][0] - center[0], poly[i][1] - center[1]];
        let b = [
            poly[(i + 1) % n][0] - center[0],
            poly[(i + 1) % n][1] - center[1],
        ];
        let d = [b[0] - a[0], b[1] - a[1]];
        let qa = dot0(d, d);
        let qb = dot0(a, d);
        let qc = dot0(a, a) - r * r;
        let disc = qb * qb - qa * qc;
        if qa == 0.0 || disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        for s in [(-qb - sq) / qa, (-qb + sq) / qa] {
            if (-1e-12..=1.0 + 1e-12).contains(&s) {
                let p = [a[0] + s * d[0], a[1] + s * d[1]];
                angles.push(p[1].atan2(p[0]));
            }
        }
    }
    let on_circle = |theta: f64| [center[0] + r * theta.cos(), center[1] + r * theta.sin()];
    if angles.is_empty() {
        return if contains(poly, on_circle(0.0), eps) {
            vec![(-PI, PI)]
        } else {
            Vec::new()
        };
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
    let m = angles.len();
    let mut arcs = Vec::new();
    for i in 0..m {
        let from = angles[i];
        let to = if i + 1 < m {
            angles[i + 1]
        } else {
            angles[0] + 2.0 * PI
        };
        if to - from <= 0.0 {
            continue;
        }
        if contains(poly, on_circle(0.5 * (from + to)), eps) {
            arcs.push((from, to));
        }
    }
    arcs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<P2> {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    #[test]
    fn hull_drops_interior_and_collinear() {
        let pts = [
            [0.0, 0.0],
            [0.5, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.5],
        ];
        let h = convex_hull(&pts, 1e-12);
        assert_eq!(h.len(), 4);
        assert!((signed_area(&h) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quarter_disk_in_unit_square() {
        let a = disk_area(&unit_square(), [0.0, 0.0], 0.5);
        assert!((a - PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn disk_containing_square_gives_square_area() {
        assert!((disk_area(&unit_square(), [0.5, 0.5], 10.0) - 1.0).abs() < 1e-14);
        assert_eq!(disk_area(&unit_square(), [5.0, 5.0], 1.0), 0.0);
    }

    #[test]
    fn disk_inside_square_gives_disk_area() {
        let sq = [[-2.0, -2.0], [2.0, -2.0], [2.0, 2.0], [-2.0, 2.0]];
        assert!((disk_area(&sq, [0.3, -0.1], 1.0) - PI).abs() < 1e-14);
    }

    #[test]
    fn disk_area_matches_fine_grid() {
        // midpoint-rule oracle on a 2000x2000 grid
        let tri = [[0.0, 0.0], [2.0, 0.3], [0.4, 1.7]];
        let (c, r) = ([0.9, 0.2], 0.8);
        let n = 2000;
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                let p = [2.0 * (i as f64 + 0.5) / n as f64, 2.0 * (j as f64 + 0.5) / n as f64];
                if contains(&tri, p, 0.0) && (p[0] - c[0]).hypot(p[1] - c[1]) <= r {
                    hits += 1;
                }
            }
        }
        let grid = hits as f64 * 4.0 / (n * n) as f64;
        assert!((disk_area(&tri, c, r) - grid).abs() < 2e-3);
    }

    #[test]
    fn arcs_of_circle_crossing_square() {
        let arcs = circle_arcs(&unit_square(), [0.0, 0.0], 0.5, 1e-12);
        assert_eq!(arcs.len(), 1);
        let (a, b) = arcs[0];
        assert!(a.abs() < 1e-12 && (b - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn clip_square_in_half() {
        assert!((area_below(&unit_square(), [1.0, 0.0], 0.25) - 0.25).abs() < 1e-15);
        assert!((area_below(&unit_square(), [1.0, 0.0], 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(area_below(&unit_square(), [1.0, 0.0], -1.0), 0.0);
    }
}
