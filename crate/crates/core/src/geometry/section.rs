use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::faces::{extreme_pair, FaceMeasure};
use super::Halfspace;
use crate::point::{AffineFrame, Point};
use crate::sampling::unit_vector;
use crate::tol;

/// `K ∩ H(v = t)`: a polytope of intrinsic dimension at most d-1 lying on
/// the hyperplane, vertex-listed. Lower-dimensional sections (faces hit by
/// a supporting hyperplane) are ordinary values.
#[derive(Clone, Debug)]
pub struct Section {
    normal: Point,
    offset: f64,
    vertices: Vec<Point>,
    intrinsic_dimension: usize,
    // facets of the parent body; they cut out the facets of the section
    bounding: Vec<Halfspace>,
    scale: f64,
}

/// Monte Carlo Steiner point with its per-coordinate standard error.
#[derive(Clone, Debug)]
pub struct SteinerEstimate {
    pub point: Point,
    pub standard_error: f64,
}

impl Section {
    pub(crate) fn new(
        normal: Point,
        offset: f64,
        vertices: Vec<Point>,
        bounding: Vec<Halfspace>,
        scale: f64,
    ) -> Section {
        let refs: Vec<&Point> = vertices.iter().collect();
        let intrinsic_dimension =
            AffineFrame::of(&refs, tol::scaled(tol::ON_PLANE, scale)).map_or(0, |f| f.rank());
        Section {
            normal,
            offset,
            vertices,
            intrinsic_dimension,
            bounding,
            scale,
        }
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn intrinsic_dimension(&self) -> usize {
        self.intrinsic_dimension
    }

    /// Intrinsic volume centroid; a point section is its own centroid.
    pub fn centroid(&self) -> Point {
        match self.intrinsic_dimension {
            0 => Point::mean(&self.vertices).unwrap(),
            1 => {
                let ids: Vec<usize> = (0..self.vertices.len()).collect();
                let (a, b) = extreme_pair(&self.vertices, &ids);
                self.vertices[a].lerp(&self.vertices[b], 0.5)
            }
            k => {
                let eps = tol::scaled(tol::ON_PLANE, self.scale);
                let ids: Vec<usize> = (0..self.vertices.len()).collect();
                FaceMeasure::new(&self.vertices, &self.bounding, eps, eps)
                    .moments(&ids, k)
                    .1
            }
        }
    }

    /// Intrinsic volume of the section.
    pub fn measure(&self) -> f64 {
        let eps = tol::scaled(tol::ON_PLANE, self.scale);
        let ids: Vec<usize> = (0..self.vertices.len()).collect();
        FaceMeasure::new(&self.vertices, &self.bounding, eps, eps)
            .moments(&ids, self.intrinsic_dimension)
            .0
    }

    /// Monte Carlo estimate of the Steiner point, computed in the affine hull
    /// of the section: the mean support point over uniformly random
    /// directions of that hull.
    pub fn steiner_point_estimate(&self, samples: usize, seed: u64) -> SteinerEstimate {
        let k = self.intrinsic_dimension;
        if k == 0 {
            return SteinerEstimate {
                point: Point::mean(&self.vertices).unwrap(),
                standard_error: 0.0,
            };
        }
        let refs: Vec<&Point> = self.vertices.iter().collect();
        let frame = AffineFrame::of(&refs, tol::scaled(tol::ON_PLANE, self.scale)).unwrap();
        let local: Vec<Point> = self.vertices.iter().map(|p| frame.to_local(p)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = samples.max(1);
        let mut sum = Point::zeros(k);
        let mut sum_sq = Point::zeros(k);
        for _ in 0..n {
            let u = unit_vector(&mut rng, k);
            let s = local
                .iter()
                .max_by(|a, b| u.dot(a).total_cmp(&u.dot(b)))
                .unwrap();
            for c in 0..k {
                sum[c] += s[c];
                sum_sq[c] += s[c] * s[c];
            }
        }
        let nf = n as f64;
        let mean = sum.scaled(1.0 / nf);
        let standard_error = (0..k)
            .map(|c| ((sum_sq[c] / nf - mean[c] * mean[c]).max(0.0) / nf).sqrt())
            .fold(0.0, f64::max);
        SteinerEstimate {
            point: frame.to_ambient(&mean),
            standard_error,
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::geometry::Body;
    use crate::point::Point;

    fn unit_square() -> crate::geometry::Body {
        Body::from_points(&[
            Point::new(&[0.0, 0.0]),
            Point::new(&[1.0, 0.0]),
            Point::new(&[1.0, 1.0]),
            Point::new(&[0.0, 1.0]),
        ])
        .unwrap()
    }

    fn unit_cube() -> Body {
        let pts: Vec<Point> = (0..8)
            .map(|m| Point::new(&[(m & 1) as f64, ((m >> 1) & 1) as f64, ((m >> 2) & 1) as f64]))
            .collect();
        Body::from_points(&pts).unwrap()
    }

    #[test]
    fn vertical_section_of_square() {
        let s = unit_square().section(&Point::new(&[1.0, 0.0]), 0.5).unwrap();
        assert_eq!(s.intrinsic_dimension(), 1);
        let mut v: Vec<_> = s.vertices().iter().map(|p| (p[0], p[1])).collect();
        v.sort_by(|a, b| a.1.total_cmp(&b.1));
        assert_eq!(v, vec![(0.5, 0.0), (0.5, 1.0)]);
        let c = s.centroid();
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn supporting_section_is_the_edge() {
        let s = unit_square().section(&Point::new(&[1.0, 0.0]), 1.0).unwrap();
        assert_eq!(s.intrinsic_dimension(), 1);
        assert_eq!(s.vertices().len(), 2);
        assert!(s.vertices().iter().all(|p| p[0] == 1.0));
        assert!(unit_square().section(&Point::new(&[1.0, 0.0]), 1.5).is_none());
    }

    #[test]
    fn corner_section_is_a_point() {
        let v = Point::new(&[1.0, 1.0]).normalized().unwrap();
        let s = unit_square().section(&v, 0.0).unwrap();
        assert_eq!(s.intrinsic_dimension(), 0);
        assert!(s.centroid().norm() < 1e-15);
    }

    #[test]
    fn cube_hexagon_section() {
        let v = Point::new(&[1.0, 1.0, 1.0]).normalized().unwrap();
        let s = unit_cube().section(&v, 3f64.sqrt() / 2.0).unwrap();
        assert_eq!(s.intrinsic_dimension(), 2);
        // the six edge midpoints with coordinate sum 3/2
        let expected = [
            [0.5, 1.0, 0.0],
            [0.5, 0.0, 1.0],
            [1.0, 0.5, 0.0],
            [0.0, 0.5, 1.0],
            [1.0, 0.0, 0.5],
            [0.0, 1.0, 0.5],
        ];
        assert_eq!(s.vertices().len(), 6);
        for e in expected {
            assert!(
                s.vertices().iter().any(|p| p.distance(&Point::new(&e)) < 1e-12),
                "missing {e:?}"
            );
        }
        let c = s.centroid();
        assert!(c.distance(&Point::new(&[0.5, 0.5, 0.5])) < 1e-12);
        // regular hexagon with side sqrt(2)/2
        let side = 2f64.sqrt() / 2.0;
        assert!((s.measure() - 1.5 * 3f64.sqrt() * side * side).abs() < 1e-12);
    }

    #[test]
    fn triangle_section_centroid_is_vertex_mean() {
        let v = Point::new(&[1.0, 1.0, 1.0]).normalized().unwrap();
        let s = unit_cube().section(&v, 0.5 / 3f64.sqrt()).unwrap();
        assert_eq!(s.vertices().len(), 3);
        let mean = Point::mean(s.vertices()).unwrap();
        assert!(s.centroid().distance(&mean) < 1e-13);
    }

    #[test]
    fn steiner_point_of_single_point_is_exact() {
        let v = Point::new(&[1.0, 1.0]).normalized().unwrap();
        let s = unit_square().section(&v, 0.0).unwrap();
        let e = s.steiner_point_estimate(10_000, 1);
        assert_eq!(e.standard_error, 0.0);
        assert!(e.point.norm() < 1e-15);
    }

    #[test]
    fn steiner_estimate_is_deterministic() {
        let s = unit_square().section(&Point::new(&[1.0, 0.0]), 0.3).unwrap();
        let a = s.steiner_point_estimate(10_000, 9);
        let b = s.steiner_point_estimate(10_000, 9);
        assert_eq!(a.point, b.point);
    }
}
