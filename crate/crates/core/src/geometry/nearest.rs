//! Minimum-norm point of a convex hull (Wolfe's algorithm). Finite and exact
//! up to roundoff for point sets, which makes it the nearest-point routine for
//! polytopes and the witness finder for inseparable vertex sets.

use nalgebra::{DMatrix, DVector};

use crate::point::Point;

#[derive(Clone, Debug)]
pub struct MinNorm {
    pub point: Point,
    /// Convex weights of the points in the final corral.
    pub weights: Vec<(usize, f64)>,
}

pub fn min_norm_point(points: &[Point]) -> MinNorm {
    assert!(!points.is_empty(), "min_norm_point of an empty set");
    let scale = points.iter().map(|p| p.norm_sq()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-13 * scale;
    let start = (0..points.len())
        .min_by(|&a, &b| points[a].norm_sq().total_cmp(&points[b].norm_sq()))
        .unwrap();
    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let mut x = points[start].clone();

    for _ in 0..(50 * points.len() + 100) {
        let j = (0..points.len())
            .min_by(|&a, &b| x.dot(&points[a]).total_cmp(&x.dot(&points[b])))
            .unwrap();
        if x.norm_sq() - x.dot(&points[j]) <= tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);
        while let Some(mu) = affine_minimizer(points, &corral) {
            if mu.iter().all(|&m| m > 1e-14) {
                lambda = mu;
                x = combine(points, &corral, &lambda);
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m <= 1e-14 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let mut k = 0;
            while k < corral.len() {
                if lambda[k] <= 1e-14 {
                    corral.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            if corral.is_empty() {
                corral.push(j);
                lambda.push(1.0);
            }
            let s: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= s);
            x = combine(points, &corral, &lambda);
            if corral.len() == 1 {
                break;
            }
        }
    }
    MinNorm {
        point: x,
        weights: corral.into_iter().zip(lambda).collect(),
    }
}

fn combine(points: &[Point], ids: &[usize], w: &[f64]) -> Point {
    let mut x = Point::zeros(points[0].dim());
    for (&i, &l) in ids.iter().zip(w) {
        x = x.axpy(l, &points[i]);
    }
    x
}

// Minimizer of |sum mu_i p_i| subject to sum mu_i = 1.
fn affine_minimizer(points: &[Point], ids: &[usize]) -> Option<Vec<f64>> {
    let k = ids.len();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    for a in 0..k {
        for b in 0..k {
            m[(a, b)] = points[ids[a]].dot(&points[ids[b]]);
        }
        m[(a, k)] = 1.0;
        m[(k, a)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = m.clone().lu().solve(&rhs).or_else(|| {
        let svd = m.svd(true, true);
        svd.solve(&rhs, 1e-14).ok()
    })?;
    let mu: Vec<f64> = (0..k).map(|i| sol[i]).collect();
    mu.iter().all(|v| v.is_finite()).then_some(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_inside_hull() {
        let pts = vec![
            Point::new(&[-1.0, -1.0]),
            Point::new(&[2.0, -1.0]),
            Point::new(&[0.0, 3.0]),
        ];
        assert!(min_norm_point(&pts).point.norm() < 1e-12);
    }

    #[test]
    fn nearest_point_on_edge() {
        let pts = vec![Point::new(&[1.0, -1.0]), Point::new(&[1.0, 2.0]), Point::new(&[3.0, 0.0])];
        let m = min_norm_point(&pts);
        assert!((m.point[0] - 1.0).abs() < 1e-12 && m.point[1].abs() < 1e-12);
    }

    #[test]
    fn nearest_point_on_facet_in_3d() {
        // unit cube centred over the origin; nearest point is (0, 0, 1)
        let mut pts = Vec::new();
        for i in 0..8 {
            pts.push(Point::new(&[
                (i & 1) as f64 - 0.5,
                ((i >> 1) & 1) as f64 - 0.5,
                ((i >> 2) & 1) as f64 + 1.0,
            ]));
        }
        let m = min_norm_point(&pts);
        assert!((m.point.norm() - 1.0).abs() < 1e-12, "{:?}", m.point);
    }
}
