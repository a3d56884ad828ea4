//! Well-separation certificates and the positive-orientation normal map.
//!
//! A family is well separated when every pair of disjoint subfamilies
//! `(I, J)` with `|I| + |J| <= d + 1` can be strictly separated by a
//! hyperplane. For polytopes each such test is a linear program over vertex
//! sets: maximise the slack `δ` with `<w, x> <= c - δ` on the `I` side,
//! `<w, y> >= c + δ` on the `J` side and `|w|_∞ <= 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::nearest::min_norm_point;
use crate::geometry::Body;
use crate::lp::{maximize, LpOutcome};
use crate::point::{det, Point};
use crate::tol;

/// An ordered family of bodies sharing one ambient dimension. The order
/// fixes the orientation convention.
#[derive(Clone, Debug)]
pub struct Family {
    dim: usize,
    bodies: Vec<Body>,
    certificate: Option<WellSeparationReport>,
}

impl Family {
    pub fn new(bodies: Vec<Body>) -> Result<Family> {
        let dim = bodies
            .first()
            .ok_or_else(|| Error::InvalidInput("empty family".into()))?
            .dim();
        if let Some(b) = bodies.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.dim(),
            });
        }
        Ok(Family {
            dim,
            bodies,
            certificate: None,
        })
    }

    /// Runs the separation check and keeps the report; fails when the
    /// family is not well separated.
    pub fn certify(mut self, tol: f64) -> Result<Family> {
        let report = check_well_separated(&self, tol);
        if !report.ok {
            return Err(Error::NotWellSeparated(Box::new(report)));
        }
        self.certificate = Some(report);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    pub fn certificate(&self) -> Option<&WellSeparationReport> {
        self.certificate.as_ref()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationWitness {
    /// Zero-based indices of the two sides of the inseparable pair.
    pub inside: Vec<usize>,
    pub outside: Vec<usize>,
    /// A point of conv(I-side) nearly equal to a point of conv(J-side).
    pub point: Point,
}

#[derive(Clone, Debug, Serialize)]
pub struct WellSeparationReport {
    pub ok: bool,
    /// Smallest separation slack over all checked pairs, with the
    /// separating normal rescaled to unit Euclidean length.
    pub margin: f64,
    pub pairs_checked: usize,
    pub witness: Option<SeparationWitness>,
}

/// Checks every disjoint pair of subfamilies with both sides nonempty and
/// at most `d + 1` members in total.
pub fn check_well_separated(family: &Family, tol: f64) -> WellSeparationReport {
    let sets: Vec<&[Point]> = family.bodies.iter().map(|b| b.vertices()).collect();
    check_point_sets(family.dim, &sets, tol)
}

/// Same check for bodies given only as point sets (their convex hulls).
pub fn check_point_sets(dim: usize, sets: &[&[Point]], tol: f64) -> WellSeparationReport {
    let n = sets.len();
    let mut margin = f64::INFINITY;
    let mut worst: Option<(Vec<usize>, Vec<usize>)> = None;
    let mut pairs_checked = 0;
    for (inside, outside) in disjoint_pairs(n, dim + 1) {
        let a: Vec<&Point> = inside.iter().flat_map(|&i| sets[i].iter()).collect();
        let b: Vec<&Point> = outside.iter().flat_map(|&j| sets[j].iter()).collect();
        let (m, _, _) = separation_margin(&a, &b);
        pairs_checked += 1;
        if m < margin {
            margin = m;
            worst = Some((inside, outside));
        }
    }
    if pairs_checked == 0 {
        margin = f64::INFINITY;
    }
    let ok = margin > tol;
    let witness = match (ok, worst) {
        (false, Some((inside, outside))) => {
            let a: Vec<&Point> = inside.iter().flat_map(|&i| sets[i].iter()).collect();
            let b: Vec<&Point> = outside.iter().flat_map(|&j| sets[j].iter()).collect();
            Some(SeparationWitness {
                point: near_common_point(&a, &b),
                inside,
                outside,
            })
        }
        _ => None,
    };
    WellSeparationReport {
        ok,
        margin,
        pairs_checked,
        witness,
    }
}

// Unordered disjoint pairs (I, J) of nonempty index sets with
// |I| + |J| <= max_total. The smallest index used always lies in I.
fn disjoint_pairs(n: usize, max_total: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let (mut inside, mut outside) = (Vec::new(), Vec::new());
        for k in 0..n {
            match c % 3 {
                1 => inside.push(k),
                2 => outside.push(k),
                _ => {}
            }
            c /= 3;
        }
        if inside.is_empty() || outside.is_empty() || inside.len() + outside.len() > max_total {
            continue;
        }
        if inside[0] > outside[0] {
            continue;
        }
        out.push((inside, outside));
    }
    out.sort_by(|x, y| {
        (x.0.len() + x.1.len())
            .cmp(&(y.0.len() + y.1.len()))
            .then_with(|| x.cmp(y))
    });
    out
}

/// Optimal separation slack between `conv(a)` and `conv(b)` with the LP
/// normal rescaled to unit length: `(margin, w, c)` with `<w,x> <= c - margin`
/// on `a` and `<w,y> >= c + margin` on `b`. Overlapping hulls give 0.
pub fn separation_margin(a: &[&Point], b: &[&Point]) -> (f64, Point, f64) {
    let dim = a[0].dim();
    // centre the data; separation is translation invariant
    let all: Vec<&Point> = a.iter().chain(b.iter()).copied().collect();
    let center = Point::mean(all.iter().copied()).unwrap();
    let shift = |p: &Point| p - &center;
    let a: Vec<Point> = a.iter().map(|p| shift(p)).collect();
    let b: Vec<Point> = b.iter().map(|p| shift(p)).collect();
    let r = a
        .iter()
        .chain(b.iter())
        .map(|p| p.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    // variables: w' = w + 1 in [0, 2], c' = c + c0 in [0, 2 c0], δ' = δ + m0
    let c0 = r + 1.0;
    let m0 = c0 + r + 1.0;
    let nvar = dim + 2;
    let mut rows = Vec::with_capacity(a.len() + b.len() + nvar);
    let mut rhs = Vec::with_capacity(rows.capacity());
    for x in &a {
        let mut row: Vec<f64> = x.iter().copied().collect();
        row.push(-1.0);
        row.push(1.0);
        rows.push(row);
        rhs.push(m0 - c0 + x.iter().sum::<f64>());
    }
    for y in &b {
        let mut row: Vec<f64> = y.iter().map(|v| -v).collect();
        row.push(1.0);
        row.push(1.0);
        rows.push(row);
        rhs.push(m0 + c0 - y.iter().sum::<f64>());
    }
    for k in 0..dim {
        let mut row = vec![0.0; nvar];
        row[k] = 1.0;
        rows.push(row);
        rhs.push(2.0);
    }
    let mut row = vec![0.0; nvar];
    row[dim] = 1.0;
    rows.push(row);
    rhs.push(2.0 * c0);
    let rhs: Vec<f64> = rhs.into_iter().map(|v: f64| v.max(0.0)).collect();

    let mut objective = vec![0.0; nvar];
    objective[dim + 1] = 1.0;
    let LpOutcome::Optimal { x, .. } = maximize(&objective, &rows, &rhs) else {
        unreachable!("separation LP is bounded");
    };
    let w = Point::from((0..dim).map(|k| x[k] - 1.0).collect::<Vec<_>>());
    let c = x[dim] - c0 + w.dot(&center);
    let delta = x[dim + 1] - m0;
    let wn = w.norm();
    // a positive optimum can be rescaled until |w|_inf = 1, so a vanishing
    // w means the optimum is zero and delta / |w| would only amplify noise
    if delta <= 1e-12 * c0 || wn < 0.5 {
        return (0.0, w, c);
    }
    (delta / wn, w.scaled(1.0 / wn), c / wn)
}

fn near_common_point(a: &[&Point], b: &[&Point]) -> Point {
    let mut diffs = Vec::with_capacity(a.len() * b.len());
    let mut pairs = Vec::with_capacity(diffs.capacity());
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            diffs.push(*p - *q);
            pairs.push((i, j));
        }
    }
    let m = min_norm_point(&diffs);
    let dim = a[0].dim();
    let (mut pa, mut pb) = (Point::zeros(dim), Point::zeros(dim));
    for (k, w) in m.weights {
        let (i, j) = pairs[k];
        pa = pa.axpy(w, a[i]);
        pb = pb.axpy(w, b[j]);
    }
    pa.lerp(&pb, 0.5)
}

/// The `(d+1) x (d+1)` determinant with columns `(v, 0), (a_1, 1), …, (a_d, 1)`.
pub fn orientation_det(v: &Point, points: &[Point]) -> f64 {
    let d = v.dim();
    let mut rows = vec![vec![0.0; d + 1]; d + 1];
    for r in 0..d {
        rows[r][0] = v[r];
        for (c, p) in points.iter().enumerate() {
            rows[r][c + 1] = p[r];
        }
    }
    for c in 0..d {
        rows[d][c + 1] = 1.0;
    }
    det(&rows)
}

/// The unit normal `v` of `aff{a_1, …, a_d}` that makes
/// [`orientation_det`] positive.
pub fn orientation_normal(points: &[Point]) -> Result<Point> {
    let d = points
        .first()
        .ok_or_else(|| Error::InvalidInput("no points".into()))?
        .dim();
    if points.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: points.len(),
        });
    }
    // Expanding the determinant along its first column, det = <v, C> where
    // C_k is the signed minor deleting row k of [a_1..a_d; 1..1].
    let mut cof = Point::zeros(d);
    for k in 0..d {
        let minor: Vec<Vec<f64>> = (0..=d)
            .filter(|&r| r != k)
            .map(|r| {
                (0..d)
                    .map(|c| if r == d { 1.0 } else { points[c][r] })
                    .collect()
            })
            .collect();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        cof[k] = sign * det(&minor);
    }
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    if cof.norm() <= 1e-13 * scale.powi(d as i32 - 1) {
        return Err(Error::DegenerateFlat);
    }
    Ok(cof.normalized().unwrap())
}

#[derive(Clone, Debug, Serialize)]
pub struct OrientationProbeReport {
    pub trials: usize,
    /// Largest change of the normal when each point is moved within its
    /// section of the same hyperplane.
    pub max_invariance_deviation: f64,
    pub invariance_violations: usize,
    /// Smallest inner product between normals of two sampled tuples.
    pub min_normal_dot: f64,
    pub antipodal_violations: usize,
}

impl OrientationProbeReport {
    pub fn violations(&self) -> usize {
        self.invariance_violations + self.antipodal_violations
    }
}

/// Samples point tuples from a well-separated family and checks that the
/// oriented normal depends only on the hyperplane, and that no two sampled
/// normals are antipodal.
pub fn orientation_invariance_probe(
    family: &Family,
    seed: u64,
    trials: usize,
) -> Result<OrientationProbeReport> {
    let report = match family.certificate() {
        Some(r) => r.clone(),
        None => check_well_separated(family, tol::MARGIN),
    };
    if !report.ok || family.len() != family.dim() {
        return Err(Error::NotWellSeparated(Box::new(report)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = OrientationProbeReport {
        trials,
        max_invariance_deviation: 0.0,
        invariance_violations: 0,
        min_normal_dot: 1.0,
        antipodal_violations: 0,
    };
    let mut previous: Option<Point> = None;
    for _ in 0..trials {
        let a: Vec<Point> = family.bodies.iter().map(|k| k.random_point(&mut rng)).collect();
        let v = orientation_normal(&a)?;
        let t = v.dot(&a[0]);
        let mut b = Vec::with_capacity(a.len());
        for (k, ai) in family.bodies.iter().zip(&a) {
            match k.section(&v, t) {
                Some(s) => {
                    let verts = s.vertices();
                    let w: Vec<f64> = verts
                        .iter()
                        .map(|_| -(1.0 - rand::Rng::gen::<f64>(&mut rng)).ln())
                        .collect();
                    let total: f64 = w.iter().sum();
                    let mut p = Point::zeros(v.dim());
                    for (q, wi) in verts.iter().zip(&w) {
                        p = p.axpy(wi / total, q);
                    }
                    b.push(p);
                }
                None => b.push(ai.clone()),
            }
        }
        let vb = orientation_normal(&b)?;
        let dev = vb.distance(&v);
        out.max_invariance_deviation = out.max_invariance_deviation.max(dev);
        if dev > 1e-9 {
            out.invariance_violations += 1;
        }
        if let Some(prev) = &previous {
            let dot = prev.dot(&v);
            out.min_normal_dot = out.min_normal_dot.min(dot);
            if 1.0 + dot <= 1e-9 {
                out.antipodal_violations += 1;
            }
        }
        previous = Some(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64) -> Body {
        Body::from_points(&[
            Point::new(&[x0, y0]),
            Point::new(&[x0 + 1.0, y0]),
            Point::new(&[x0 + 1.0, y0 + 1.0]),
            Point::new(&[x0, y0 + 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn two_squares_are_separated_with_unit_margin() {
        let f = Family::new(vec![square(0.0, 0.0), square(3.0, 0.0)]).unwrap();
        let r = check_well_separated(&f, tol::MARGIN);
        assert!(r.ok);
        assert_eq!(r.pairs_checked, 1);
        assert!((r.margin - 1.0).abs() < 1e-9, "{}", r.margin);
        // oracle: the slab 1 < x < 3 separates every vertex pair
        for p in f.bodies()[0].vertices() {
            for q in f.bodies()[1].vertices() {
                assert!(p[0] <= 1.0 && q[0] >= 3.0);
            }
        }
    }

    #[test]
    fn overlapping_squares_fail_with_witness() {
        let f = Family::new(vec![square(0.0, 0.0), square(0.5, 0.0)]).unwrap();
        let r = check_well_separated(&f, tol::MARGIN);
        assert!(!r.ok);
        let w = r.witness.unwrap();
        assert_eq!((w.inside, w.outside), (vec![0], vec![1]));
        assert!(f.bodies()[0].contains(&w.point) && f.bodies()[1].contains(&w.point));
    }

    #[test]
    fn three_collinear_squares_fail_on_outer_pair_versus_middle() {
        let f = Family::new(vec![square(0.0, 0.0), square(3.0, 0.0), square(6.0, 0.0)]).unwrap();
        let r = check_well_separated(&f, tol::MARGIN);
        assert!(!r.ok);
        let w = r.witness.unwrap();
        assert_eq!((w.inside, w.outside), (vec![0, 2], vec![1]));
        // the horizontal line y = 0.5 meets all three squares
        for b in f.bodies() {
            let (lo, hi) = b.support_interval(&Point::new(&[0.0, 1.0]));
            assert!(lo <= 0.5 && 0.5 <= hi);
        }
    }

    #[test]
    fn orientation_normal_examples() {
        assert_eq!(orientation_normal(&[Point::new(&[5.0])]).unwrap().coords(), &[1.0]);
        assert_eq!(
            orientation_det(&Point::new(&[-1.0]), &[Point::new(&[5.0])]),
            -1.0
        );
        let v = orientation_normal(&[Point::new(&[0.0, 0.0]), Point::new(&[1.0, 0.0])]).unwrap();
        assert!(v.distance(&Point::new(&[0.0, 1.0])) < 1e-15);
        let pts = [Point::new(&[1.0, 0.0]), Point::new(&[3.0, 1.0])];
        let v = orientation_normal(&pts).unwrap();
        let expected = Point::new(&[-1.0, 2.0]).scaled(1.0 / 5f64.sqrt());
        assert!(v.distance(&expected) < 1e-15);
        assert!((orientation_det(&v, &pts) - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_flat_is_rejected() {
        let r = orientation_normal(&[Point::new(&[1.0, 1.0]), Point::new(&[1.0, 1.0])]);
        assert!(matches!(r, Err(Error::DegenerateFlat)));
    }

    #[test]
    fn probe_refuses_overlapping_family() {
        let f = Family::new(vec![square(0.0, 0.0), square(0.5, 0.0)]).unwrap();
        assert!(matches!(
            orientation_invariance_probe(&f, 1, 10),
            Err(Error::NotWellSeparated(_))
        ));
    }

    #[test]
    fn probe_on_two_squares() {
        let f = Family::new(vec![square(0.0, 0.0), square(3.0, 0.0)]).unwrap();
        let r = orientation_invariance_probe(&f, 7, 200).unwrap();
        assert_eq!(r.violations(), 0);
        assert!(r.min_normal_dot > -1.0);
    }

    #[test]
    fn pair_enumeration_counts() {
        // n = d: every disjoint pair of nonempty sets
        assert_eq!(disjoint_pairs(2, 3).len(), 1);
        assert_eq!(disjoint_pairs(3, 4).len(), 6);
        assert_eq!(disjoint_pairs(4, 5).len(), 25);
        // three bodies in the plane: |I| + |J| <= 3 removes nothing for n = 3
        assert_eq!(disjoint_pairs(3, 3).len(), 6);
    }

    // Separating-axis gap of two triangles: the largest projected gap over
    // the edge normals of both, positive exactly when they are disjoint.
    fn axis_gap(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for poly in [a, b] {
            for i in 0..3 {
                let (p, q) = (poly[i], poly[(i + 1) % 3]);
                let n = [q[1] - p[1], p[0] - q[0]];
                let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
                let proj = |x: &[f64; 2]| (n[0] * x[0] + n[1] * x[1]) / len;
                let (amin, amax) = a.iter().map(proj).fold((f64::INFINITY, f64::NEG_INFINITY), |m, v| (m.0.min(v), m.1.max(v)));
                let (bmin, bmax) = b.iter().map(proj).fold((f64::INFINITY, f64::NEG_INFINITY), |m, v| (m.0.min(v), m.1.max(v)));
                best = best.max(bmin - amax).max(amin - bmax);
            }
        }
        best
    }

    #[test]
    fn margin_sign_matches_separating_axes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        for _ in 0..3000 {
            let tri = |rng: &mut rand_chacha::ChaCha8Rng| {
                let c = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
                [0; 3].map(|_| [c[0] + rng.gen_range(-2.0..2.0), c[1] + rng.gen_range(-2.0..2.0)])
            };
            let (a, b) = (tri(&mut rng), tri(&mut rng));
            let gap = axis_gap(&a, &b);
            if gap.abs() < 1e-6 {
                continue;
            }
            let pa: Vec<Point> = a.iter().map(|p| Point::new(p)).collect();
            let pb: Vec<Point> = b.iter().map(|p| Point::new(p)).collect();
            let (m, w, c) = separation_margin(&pa.iter().collect::<Vec<_>>(), &pb.iter().collect::<Vec<_>>());
            assert_eq!(m > 0.0, gap > 0.0, "gap {gap}, margin {m}, {a:?} {b:?}");
            if m > 0.0 {
                assert!(pa.iter().all(|x| w.dot(x) <= c - m + 1e-12));
                assert!(pb.iter().all(|y| w.dot(y) >= c + m - 1e-12));
            }
            checked += 1;
        }
        assert!(checked > 2500);
    }
}
