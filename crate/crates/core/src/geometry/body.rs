use rand::Rng;

use super::faces::FaceMeasure;
use super::nearest::min_norm_point;
use super::polygon::{self, P2};
use super::{Halfspace, Section, MAX_DIM};
use crate::error::{Error, Result};
use crate::point::{affine_rank, det, AffineFrame, Point};
use crate::tol;

/// A full-dimensional convex polytope in dual representation.
///
/// In the plane the vertex list is counter-clockwise and facet `i` is the
/// edge from vertex `i` to vertex `i + 1`.
#[derive(Clone, Debug)]
pub struct Body {
    dim: usize,
    vertices: Vec<Point>,
    facets: Vec<Halfspace>,
    edges: Vec<(usize, usize)>,
    volume: f64,
    centroid: Point,
    scale: f64,
}

impl Body {
    /// Convex hull of `points`. Points interior to the hull are dropped.
    pub fn from_points(points: &[Point]) -> Result<Body> {
        let first = points
            .first()
            .ok_or_else(|| Error::DegenerateBody("no points".into()))?;
        let dim = first.dim();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::DegenerateBody("non-finite coordinate".into()));
            }
        }
        let scale = bounding_diameter(points);
        let refs: Vec<&Point> = points.iter().collect();
        if scale == 0.0 || affine_rank(&refs, tol::scaled(tol::COINCIDENCE, scale) * 1e2) < dim {
            return Err(Error::DegenerateBody(format!(
                "points do not span R^{dim}"
            )));
        }
        match dim {
            1 => {
                let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                Ok(Body::interval(lo, hi))
            }
            2 => {
                let pts: Vec<P2> = points.iter().map(polygon::to_p2).collect();
                let hull = polygon::convex_hull(&pts, tol::scaled(tol::COINCIDENCE, scale));
                Body::from_ccw_polygon(&hull)
            }
            _ => {
                let eps = tol::scaled(tol::ON_PLANE, scale);
                let mut pts = points.to_vec();
                dedup_points(&mut pts, tol::scaled(tol::COINCIDENCE, scale));
                let facets = hull_facets(&pts, eps);
                Body::from_vertices_and_planes(dim, pts, facets, scale)
            }
        }
    }

    fn interval(lo: f64, hi: f64) -> Body {
        let facets = vec![
            Halfspace::new(Point::new(&[-1.0]), -lo).unwrap(),
            Halfspace::new(Point::new(&[1.0]), hi).unwrap(),
        ];
        Body {
            dim: 1,
            vertices: vec![Point::new(&[lo]), Point::new(&[hi])],
            facets,
            edges: vec![(0, 1)],
            volume: hi - lo,
            centroid: Point::new(&[0.5 * (lo + hi)]),
            scale: hi - lo,
        }
    }

    fn from_ccw_polygon(poly: &[P2]) -> Result<Body> {
        let area = polygon::signed_area(poly);
        if poly.len() < 3 || area <= 0.0 {
            return Err(Error::DegenerateBody("polygon has no area".into()));
        }
        let n = poly.len();
        let vertices: Vec<Point> = poly.iter().map(|p| Point::new(p)).collect();
        let mut facets = Vec::with_capacity(n);
        for i in 0..n {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let w = Point::new(&[b[1] - a[1], a[0] - b[0]]);
            let c = w[0] * a[0] + w[1] * a[1];
            facets.push(
                Halfspace::from_unnormalized(&w, c)
                    .map_err(|_| Error::DegenerateBody("zero-length edge".into()))?,
            );
        }
        let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let c = polygon::centroid(poly).expect("positive area");
        let scale = bounding_diameter(&vertices);
        Ok(Body {
            dim: 2,
            vertices,
            facets,
            edges,
            volume: area,
            centroid: Point::new(&c),
            scale,
        })
    }

    // Keeps the planes that support a facet and the points that are
    // vertices, then derives the edge graph and moments.
    fn from_vertices_and_planes(
        dim: usize,
        mut points: Vec<Point>,
        planes: Vec<Halfspace>,
        scale: f64,
    ) -> Result<Body> {
        let eps = tol::scaled(tol::ON_PLANE, scale);
        let rank_tol = tol::scaled(tol::ON_PLANE, scale);
        dedup_points(&mut points, tol::scaled(tol::COINCIDENCE, scale) * 1e2);
        let on = |h: &Halfspace, p: &Point| h.signed_distance(p).abs() <= eps;

        let mut facets: Vec<Halfspace> = Vec::new();
        for h in planes {
            let incident: Vec<&Point> = points.iter().filter(|p| on(&h, p)).collect();
            if incident.len() >= dim
                && affine_rank(&incident, rank_tol) == dim - 1
                && !facets.iter().any(|f| same_plane(f, &h, eps))
            {
                facets.push(h);
            }
        }
        let vertices: Vec<Point> = points
            .into_iter()
            .filter(|p| {
                let normals: Vec<Point> = facets
                    .iter()
                    .filter(|f| on(f, p))
                    .map(|f| f.normal().clone())
                    .collect();
                normal_rank(&normals) == dim
            })
            .collect();
        if vertices.len() < dim + 1 {
            return Err(Error::DegenerateBody("too few vertices".into()));
        }
        let incidence: Vec<Vec<usize>> = vertices
            .iter()
            .map(|p| (0..facets.len()).filter(|&j| on(&facets[j], p)).collect())
            .collect();
        let mut edges = Vec::new();
        for i in 0..vertices.len() {
            for j in (i + 1)..vertices.len() {
                let common: Vec<Point> = incidence[i]
                    .iter()
                    .filter(|f| incidence[j].contains(f))
                    .map(|&f| facets[f].normal().clone())
                    .collect();
                if common.len() >= dim - 1 && normal_rank(&common) == dim - 1 {
                    edges.push((i, j));
                }
            }
        }
        let ids: Vec<usize> = (0..vertices.len()).collect();
        let fm = FaceMeasure::new(&vertices, &facets, eps, rank_tol);
        let (volume, centroid) = fm.moments(&ids, dim);
        if volume.is_nan() || volume <= 0.0 {
            return Err(Error::DegenerateBody("zero volume".into()));
        }
        let scale = bounding_diameter(&vertices);
        Ok(Body {
            dim,
            vertices,
            facets,
            edges,
            volume,
            centroid,
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn centroid(&self) -> &Point {
        &self.centroid
    }

    /// Diameter of the bounding box, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn plane_tolerance(&self) -> f64 {
        tol::scaled(tol::ON_PLANE, self.scale)
    }

    /// Volume recomputed from the vertex and facet lists, ignoring the cache.
    pub fn recompute_volume(&self) -> f64 {
        match self.dim {
            1 => self.vertices[1][0] - self.vertices[0][0],
            2 => polygon::signed_area(&self.polygon()),
            _ => {
                let ids: Vec<usize> = (0..self.vertices.len()).collect();
                let eps = self.plane_tolerance();
                FaceMeasure::new(&self.vertices, &self.facets, eps, eps)
                    .moments(&ids, self.dim)
                    .0
            }
        }
    }

    /// Largest facet violation of `x` (non-positive inside).
    pub fn max_violation(&self, x: &Point) -> f64 {
        self.facets
            .iter()
            .map(|h| h.signed_distance(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.max_violation(x) <= self.plane_tolerance()
    }

    /// `(min, max)` of `<v, x>` over the body.
    pub fn support_interval(&self, v: &Point) -> (f64, f64) {
        self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let s = v.dot(p);
            (lo.min(s), hi.max(s))
        })
    }

    /// A vertex attaining the minimum (`max == false`) or maximum of `<v, x>`.
    pub fn extreme_vertex(&self, v: &Point, max: bool) -> &Point {
        let key = |p: &&Point| if max { v.dot(p) } else { -v.dot(p) };
        self.vertices
            .iter()
            .max_by(|a, b| key(a).total_cmp(&key(b)))
            .unwrap()
    }

    pub(crate) fn polygon(&self) -> Vec<P2> {
        self.vertices.iter().map(polygon::to_p2).collect()
    }

    /// `Vol(K ∩ {x : <v, x> <= t})` without building the clipped body.
    pub fn volume_below(&self, v: &Point, t: f64) -> f64 {
        let (lo, hi) = self.support_interval(v);
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return self.volume;
        }
        match self.dim {
            1 => {
                let (a, b) = (self.vertices[0][0], self.vertices[1][0]);
                if v[0] > 0.0 {
                    (t / v[0]).clamp(a, b) - a
                } else {
                    b - (t / v[0]).clamp(a, b)
                }
            }
            2 => polygon::area_below(&self.polygon(), [v[0], v[1]], t).clamp(0.0, self.volume),
            _ => {
                let Ok(cut) = Halfspace::from_unnormalized(v, t) else {
                    return 0.0;
                };
                let pts = self.clipped_points(&cut);
                let eps = self.plane_tolerance();
                let refs: Vec<&Point> = pts.iter().collect();
                if affine_rank(&refs, eps) < self.dim {
                    return 0.0;
                }
                let mut planes = self.facets.clone();
                planes.push(cut);
                let ids: Vec<usize> = (0..pts.len()).collect();
                FaceMeasure::new(&pts, &planes, eps, eps)
                    .moments(&ids, self.dim)
                    .0
                    .clamp(0.0, self.volume)
            }
        }
    }

    // Vertices of K ∩ hs: the kept vertices plus edge crossings.
    fn clipped_points(&self, hs: &Halfspace) -> Vec<Point> {
        let eps = self.plane_tolerance();
        let s: Vec<f64> = self.vertices.iter().map(|p| hs.signed_distance(p)).collect();
        let mut out: Vec<Point> = self
            .vertices
            .iter()
            .zip(&s)
            .filter(|(_, &si)| si <= eps)
            .map(|(p, _)| p.clone())
            .collect();
        for &(i, j) in &self.edges {
            if (s[i] < -eps && s[j] > eps) || (s[i] > eps && s[j] < -eps) {
                out.push(self.vertices[i].lerp(&self.vertices[j], s[i] / (s[i] - s[j])));
            }
        }
        out
    }

    /// `K ∩ hs`, or `None` when the intersection has zero volume.
    pub fn clip(&self, hs: &Halfspace) -> Option<Body> {
        let eps = self.plane_tolerance();
        if self.vertices.iter().all(|p| hs.signed_distance(p) <= eps) {
            return Some(self.clone());
        }
        match self.dim {
            1 => {
                let (a, b) = (self.vertices[0][0], self.vertices[1][0]);
                let x = hs.offset() / hs.normal()[0];
                let (lo, hi) = if hs.normal()[0] > 0.0 { (a, x.min(b)) } else { (x.max(a), b) };
                (hi - lo > eps).then(|| Body::interval(lo, hi))
            }
            2 => {
                let mut out = Vec::new();
                let n = hs.normal();
                polygon::clip_halfplane(&self.polygon(), [n[0], n[1]], hs.offset(), &mut out);
                let hull = polygon::convex_hull(&out, tol::scaled(tol::COINCIDENCE, self.scale));
                let b = Body::from_ccw_polygon(&hull).ok()?;
                (b.volume > tol::VOLUME_REL * self.volume).then_some(b)
            }
            _ => {
                let pts = self.clipped_points(hs);
                let mut planes = self.facets.clone();
                planes.push(hs.clone());
                let b = Body::from_vertices_and_planes(self.dim, pts, planes, self.scale).ok()?;
                (b.volume > tol::VOLUME_REL * self.volume).then_some(b)
            }
        }
    }

    /// `K ∩ {x : <v, x> = t}`, or `None` when the hyperplane misses the body.
    pub fn section(&self, v: &Point, t: f64) -> Option<Section> {
        let eps = self.plane_tolerance();
        let s: Vec<f64> = self.vertices.iter().map(|p| v.dot(p) - t).collect();
        let mut pts: Vec<Point> = self
            .vertices
            .iter()
            .zip(&s)
            .filter(|(_, si)| si.abs() <= eps)
            .map(|(p, _)| p.clone())
            .collect();
        for &(i, j) in &self.edges {
            if (s[i] < -eps && s[j] > eps) || (s[i] > eps && s[j] < -eps) {
                pts.push(self.vertices[i].lerp(&self.vertices[j], s[i] / (s[i] - s[j])));
            }
        }
        if pts.is_empty() {
            return None;
        }
        dedup_points(&mut pts, tol::scaled(tol::COINCIDENCE, self.scale) * 1e2);
        Some(Section::new(v.clone(), t, pts, self.facets.clone(), self.scale))
    }

    /// Nearest point of the body to `u`.
    pub fn nearest_point(&self, u: &Point) -> Point {
        if self.contains(u) {
            return u.clone();
        }
        let shifted: Vec<Point> = self.vertices.iter().map(|p| p - u).collect();
        &min_norm_point(&shifted).point + u
    }

    /// Identity on the body, nearest-point projection outside it.
    pub fn project(&self, x: &Point) -> Point {
        if self.max_violation(x) <= 0.0 {
            x.clone()
        } else {
            self.nearest_point(x)
        }
    }

    /// Rebuilds the body from the mapped vertex list.
    pub fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> Result<Body> {
        let pts: Vec<Point> = self.vertices.iter().map(f).collect();
        Body::from_points(&pts)
    }

    pub fn translated(&self, by: &Point) -> Result<Body> {
        self.map_vertices(|p| p + by)
    }

    /// Random convex combination of the vertices (flat Dirichlet weights).
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let w: Vec<f64> = (0..self.vertices.len())
            .map(|_| -(1.0 - rng.gen::<f64>()).ln())
            .collect();
        let total: f64 = w.iter().sum();
        let mut x = Point::zeros(self.dim);
        for (p, wi) in self.vertices.iter().zip(&w) {
            x = x.axpy(wi / total, p);
        }
        x
    }
}

pub(crate) fn bounding_diameter(points: &[Point]) -> f64 {
    let dim = points[0].dim();
    (0..dim)
        .map(|k| {
            let lo = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            (hi - lo) * (hi - lo)
        })
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn dedup_points(points: &mut Vec<Point>, eps: f64) {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points.drain(..) {
        if !out.iter().any(|q| q.distance(&p) <= eps) {
            out.push(p);
        }
    }
    *points = out;
}

fn same_plane(a: &Halfspace, b: &Halfspace, eps: f64) -> bool {
    a.normal().distance(b.normal()) <= 1e-9 && (a.offset() - b.offset()).abs() <= eps
}

fn normal_rank(normals: &[Point]) -> usize {
    if normals.is_empty() {
        return 0;
    }
    let origin = Point::zeros(normals[0].dim());
    let mut refs: Vec<&Point> = vec![&origin];
    refs.extend(normals.iter());
    affine_rank(&refs, 1e-9)
}

// Unit normal of the hyperplane through `pts` (d points in R^d) by cofactor
// expansion, or None when they are affinely dependent.
pub(crate) fn hyperplane_normal(pts: &[&Point]) -> Option<Point> {
    let d = pts[0].dim();
    let diffs: Vec<Point> = pts[1..].iter().map(|p| *p - pts[0]).collect();
    let mut n = Point::zeros(d);
    for k in 0..d {
        let minor: Vec<Vec<f64>> = diffs
            .iter()
            .map(|r| (0..d).filter(|&c| c != k).map(|c| r[c]).collect())
            .collect();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        n[k] = sign * det(&minor);
    }
    n.normalized()
}

// Facet planes of conv(points) by testing every d-subset.
fn hull_facets(points: &[Point], eps: f64) -> Vec<Halfspace> {
    let dim = points[0].dim();
    let n = points.len();
    let mut facets: Vec<Halfspace> = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    loop {
        let refs: Vec<&Point> = idx.iter().map(|&i| &points[i]).collect();
        let frame_ok = AffineFrame::of(&refs, eps).is_some_and(|f| f.rank() == dim - 1);
        if frame_ok {
            if let Some(normal) = hyperplane_normal(&refs) {
                let c = normal.dot(refs[0]);
                let (mut below, mut above) = (true, true);
                for p in points {
                    let s = normal.dot(p) - c;
                    below &= s <= eps;
                    above &= s >= -eps;
                    if !below && !above {
                        break;
                    }
                }
                let plane = if below {
                    Some(Halfspace::from_unnormalized(&normal, c))
                } else if above {
                    Some(Halfspace::from_unnormalized(&normal.scaled(-1.0), -c))
                } else {
                    None
                };
                if let Some(Ok(h)) = plane {
                    if !facets.iter().any(|f| same_plane(f, &h, eps)) {
                        facets.push(h);
                    }
                }
            }
        }
        // next combination
        let mut k = dim;
        loop {
            if k == 0 {
                return facets;
            }
            k -= 1;
            if idx[k] < n - dim + k {
                idx[k] += 1;
                for m in (k + 1)..dim {
                    idx[m] = idx[m - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[&[f64]]) -> Vec<Point> {
        raw.iter().map(|p| Point::new(p)).collect()
    }

    fn unit_square() -> Body {
        Body::from_points(&pts(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]])).unwrap()
    }

    fn cube(dim: usize) -> Body {
        let points: Vec<Point> = (0..(1usize << dim))
            .map(|m| Point::from((0..dim).map(|k| ((m >> k) & 1) as f64).collect::<Vec<_>>()))
            .collect();
        Body::from_points(&points).unwrap()
    }

    #[test]
    fn unit_square_has_four_facets_and_unit_volume() {
        let b = unit_square();
        assert_eq!(b.facets().len(), 4);
        assert_eq!(b.volume(), 1.0);
    }

    #[test]
    fn interior_point_is_dropped() {
        let b = Body::from_points(&pts(&[
            &[0.0, 0.0],
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[0.0, 1.0],
            &[0.5, 0.5],
        ]))
        .unwrap();
        assert_eq!(b.vertices().len(), 4);
        assert_eq!(b.volume(), 1.0);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let r = Body::from_points(&pts(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]));
        assert!(matches!(r, Err(Error::DegenerateBody(_))));
    }

    #[test]
    fn standard_simplex_volume_in_3d() {
        let b = Body::from_points(&pts(&[
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ]))
        .unwrap();
        assert!((b.volume() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(b.facets().len(), 4);
        assert_eq!(b.edges().len(), 6);
    }

    #[test]
    fn cubes_in_three_to_five_dimensions() {
        for dim in 3..=5 {
            let b = cube(dim);
            assert_eq!(b.facets().len(), 2 * dim);
            assert_eq!(b.vertices().len(), 1 << dim);
            assert_eq!(b.edges().len(), dim << (dim - 1));
            assert!((b.volume() - 1.0).abs() < 1e-12, "dim {dim}: {}", b.volume());
            for c in b.centroid().iter() {
                assert!((c - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cube_clip_and_volume_below() {
        let b = cube(3);
        let v = Point::new(&[1.0, 1.0, 1.0]).normalized().unwrap();
        // plane through three corners adjacent to the origin cuts a corner tetrahedron
        let t = 1.0 / 3f64.sqrt();
        assert!((b.volume_below(&v, t) - 1.0 / 6.0).abs() < 1e-14);
        let hs = Halfspace::new(v.clone(), t).unwrap();
        let c = b.clip(&hs).unwrap();
        assert_eq!(c.vertices().len(), 4);
        assert!((c.volume() - 1.0 / 6.0).abs() < 1e-14);
        assert!((b.volume_below(&v, 3f64.sqrt() / 2.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn square_clip_examples() {
        let b = unit_square();
        let h = Halfspace::new(Point::new(&[1.0, 0.0]), 0.25).unwrap();
        assert!((b.clip(&h).unwrap().volume() - 0.25).abs() < 1e-15);
        let h = Halfspace::new(Point::new(&[1.0, 0.0]), 2.0).unwrap();
        assert_eq!(b.clip(&h).unwrap().volume(), 1.0);
        let h = Halfspace::new(Point::new(&[1.0, 0.0]), -0.5).unwrap();
        assert!(b.clip(&h).is_none());
    }

    #[test]
    fn support_interval_of_square() {
        let b = unit_square();
        assert_eq!(b.support_interval(&Point::new(&[1.0, 0.0])), (0.0, 1.0));
        let v = Point::new(&[1.0, 1.0]).normalized().unwrap();
        let (lo, hi) = b.support_interval(&v);
        assert_eq!(lo, 0.0);
        assert!((hi - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_bodies() {
        let b = Body::from_points(&pts(&[&[5.0], &[2.0], &[3.0]])).unwrap();
        assert_eq!(b.volume(), 3.0);
        assert!((b.volume_below(&Point::new(&[1.0]), 3.2) - 1.2).abs() < 1e-15);
        assert!((b.volume_below(&Point::new(&[-1.0]), -3.2) - 1.8).abs() < 1e-15);
    }

    #[test]
    fn nearest_point_outside_cube() {
        let b = cube(3);
        let p = b.nearest_point(&Point::new(&[2.0, 0.5, 0.5]));
        assert!(p.distance(&Point::new(&[1.0, 0.5, 0.5])) < 1e-12);
    }
}
