//! Small dense points and the handful of linear-algebra helpers the
//! geometry kernel needs. Dimensions are tiny (at most 6), so points live
//! inline in a `SmallVec`.

use std::fmt;
use std::ops::{Add, Deref, DerefMut, Mul, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(SmallVec<[f64; 6]>);

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        Point(SmallVec::from_slice(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Point(SmallVec::from_elem(0.0, dim))
    }

    /// Unit coordinate vector `e_axis`.
    pub fn basis(dim: usize, axis: usize) -> Self {
        let mut p = Point::zeros(dim);
        p[axis] = 1.0;
        p
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self.scaled(1.0 / n))
        } else {
            None
        }
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point(self.iter().map(|x| x * s).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Point) -> Point {
        Point(self.iter().zip(other.iter()).map(|(a, b)| a + s * b).collect())
    }

    /// `(1 - s) * self + s * other`
    pub fn lerp(&self, other: &Point, s: f64) -> Point {
        Point(
            self.iter()
                .zip(other.iter())
                .map(|(a, b)| a + s * (b - a))
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Appends one coordinate.
    pub fn extended(&self, last: f64) -> Point {
        let mut p = self.clone();
        p.0.push(last);
        p
    }

    /// Drops the last coordinate.
    pub fn truncated(&self) -> Point {
        Point::new(&self.0[..self.dim() - 1])
    }

    pub fn mean<'a, I>(points: I) -> Option<Point>
    where
        I: IntoIterator<Item = &'a Point>,
    {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut acc = first.clone();
        let mut n = 1.0;
        for p in it {
            for (a, b) in acc.iter_mut().zip(p.iter()) {
                *a += b;
            }
            n += 1.0;
        }
        Some(acc.scaled(1.0 / n))
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(SmallVec::from_vec(v))
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0.into_vec()
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Add<&Point> for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        self.axpy(1.0, rhs)
    }
}

impl Sub<&Point> for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        self.scaled(rhs)
    }
}

/// Orthonormal frame of the affine hull of a point set.
#[derive(Clone, Debug)]
pub struct AffineFrame {
    pub origin: Point,
    pub basis: Vec<Point>,
}

impl AffineFrame {
    /// Gram-Schmidt with greedy pivoting: at each step the point with the
    /// largest residual is added. Residuals below `tol` stop the process.
    pub fn of(points: &[&Point], tol: f64) -> Option<AffineFrame> {
        let origin = (*points.first()?).clone();
        let dim = origin.dim();
        let mut basis: Vec<Point> = Vec::new();
        let mut residuals: Vec<Point> = points.iter().map(|p| *p - &origin).collect();
        while basis.len() < dim {
            let (best, norm) = residuals
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r.norm()))
                .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if norm <= tol {
                break;
            }
            let e = residuals[best].scaled(1.0 / norm);
            for r in residuals.iter_mut() {
                let c = r.dot(&e);
                *r = r.axpy(-c, &e);
            }
            // one re-orthogonalisation pass against the existing basis
            let mut e = e;
            for b in &basis {
                let c = e.dot(b);
                e = e.axpy(-c, b);
            }
            let e = e.normalized()?;
            basis.push(e);
        }
        Some(AffineFrame { origin, basis })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Intrinsic coordinates of `p` (its projection onto the hull).
    pub fn to_local(&self, p: &Point) -> Point {
        let d = p - &self.origin;
        Point(self.basis.iter().map(|b| b.dot(&d)).collect())
    }

    pub fn to_ambient(&self, local: &Point) -> Point {
        let mut p = self.origin.clone();
        for (b, c) in self.basis.iter().zip(local.iter()) {
            p = p.axpy(*c, b);
        }
        p
    }

    /// Euclidean distance from `p` to the affine hull.
    pub fn distance(&self, p: &Point) -> f64 {
        let mut r = p - &self.origin;
        for b in &self.basis {
            let c = r.dot(b);
            r = r.axpy(-c, b);
        }
        r.norm()
    }
}

pub fn affine_rank(points: &[&Point], tol: f64) -> usize {
    AffineFrame::of(points, tol).map_or(0, |f| f.rank())
}

/// Determinant of a small square matrix given row-major.
pub fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    if n == 0 {
        return 1.0;
    }
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    m.determinant()
}

/// Orthonormal basis of the orthogonal complement of the unit vector `v`.
pub fn tangent_basis(v: &Point) -> Vec<Point> {
    let dim = v.dim();
    let mut out: Vec<Point> = Vec::with_capacity(dim.saturating_sub(1));
    let mut frame = vec![v.clone()];
    // add coordinate axes in order of least alignment with v
    let mut axes: Vec<usize> = (0..dim).collect();
    axes.sort_by(|&a, &b| v[a].abs().partial_cmp(&v[b].abs()).unwrap());
    for axis in axes {
        if out.len() + 1 == dim {
            break;
        }
        let mut e = Point::basis(dim, axis);
        for _ in 0..2 {
            for f in &frame {
                let c = e.dot(f);
                e = e.axpy(-c, f);
            }
        }
        if let Some(e) = e.normalized() {
            if e.is_finite() {
                frame.push(e.clone());
                out.push(e);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_of_collinear_points_has_rank_one() {
        let pts = [
            Point::new(&[0.0, 0.0]),
            Point::new(&[1.0, 1.0]),
            Point::new(&[3.0, 3.0]),
        ];
        let refs: Vec<&Point> = pts.iter().collect();
        let f = AffineFrame::of(&refs, 1e-12).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(f.distance(&Point::new(&[2.0, 2.0])) < 1e-14);
        assert!((f.distance(&Point::new(&[0.0, 2.0])) - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        let v = Point::new(&[1.0, 2.0, -2.0]).normalized().unwrap();
        let b = tangent_basis(&v);
        assert_eq!(b.len(), 2);
        for e in &b {
            assert!(e.dot(&v).abs() < 1e-14);
            assert!((e.norm() - 1.0).abs() < 1e-14);
        }
        assert!(b[0].dot(&b[1]).abs() < 1e-14);
    }

    #[test]
    fn det_of_identity_and_swap() {
        assert_eq!(det(&[vec![1.0, 0.0], vec![0.0, 1.0]]), 1.0);
        assert_eq!(det(&[vec![0.0, 1.0], vec![1.0, 0.0]]), -1.0);
    }
}
