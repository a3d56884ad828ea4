//! Volume and centroid of a k-dimensional polytope face by recursive cone
//! decomposition: the face is the union of cones from its vertex average
//! over its facets, and each facet is measured the same way one dimension
//! down. Facets are recovered from incidences with a list of supporting
//! hyperplanes, so the same routine measures bodies, clipped bodies,
//! hyperplane sections and faces.

use crate::geometry::Halfspace;
use crate::point::{AffineFrame, Point};

pub(crate) struct FaceMeasure<'a> {
    points: &'a [Point],
    // on[j][i]: point i lies on plane j
    on: Vec<Vec<bool>>,
    rank_tol: f64,
}

impl<'a> FaceMeasure<'a> {
    pub(crate) fn new(
        points: &'a [Point],
        planes: &[Halfspace],
        plane_tol: f64,
        rank_tol: f64,
    ) -> Self {
        let on = planes
            .iter()
            .map(|h| {
                points
                    .iter()
                    .map(|p| h.signed_distance(p).abs() <= plane_tol)
                    .collect()
            })
            .collect();
        FaceMeasure {
            points,
            on,
            rank_tol,
        }
    }

    /// `(k-volume, centroid)` of the face spanned by `ids`, which must have
    /// affine dimension `k`.
    pub(crate) fn moments(&self, ids: &[usize], k: usize) -> (f64, Point) {
        match k {
            0 => (1.0, self.points[ids[0]].clone()),
            1 => {
                let (a, b) = extreme_pair(self.points, ids);
                let (pa, pb) = (&self.points[a], &self.points[b]);
                (pa.distance(pb), pa.lerp(pb, 0.5))
            }
            _ => self.cone_sum(ids, k),
        }
    }

    fn cone_sum(&self, ids: &[usize], k: usize) -> (f64, Point) {
        let apex = Point::mean(ids.iter().map(|&i| &self.points[i])).expect("nonempty face");
        let mut seen: Vec<Vec<usize>> = Vec::new();
        let mut volume = 0.0;
        let mut weighted = Point::zeros(apex.dim());
        for row in &self.on {
            let sub: Vec<usize> = ids.iter().copied().filter(|&i| row[i]).collect();
            if sub.len() < k || sub.len() == ids.len() || seen.contains(&sub) {
                continue;
            }
            let refs: Vec<&Point> = sub.iter().map(|&i| &self.points[i]).collect();
            let Some(frame) = AffineFrame::of(&refs, self.rank_tol) else {
                continue;
            };
            if frame.rank() != k - 1 {
                continue;
            }
            let height = frame.distance(&apex);
            let (facet_volume, facet_centroid) = self.moments(&sub, k - 1);
            seen.push(sub);
            let cone = height * facet_volume / k as f64;
            // cone centroid sits k/(k+1) of the way from apex to base centroid
            let c = apex.lerp(&facet_centroid, k as f64 / (k as f64 + 1.0));
            weighted = weighted.axpy(cone, &c);
            volume += cone;
        }
        if volume > 0.0 {
            (volume, weighted.scaled(1.0 / volume))
        } else {
            (0.0, apex)
        }
    }
}

/// Indices of an (approximately) farthest pair, by two farthest-point sweeps.
pub(crate) fn extreme_pair(points: &[Point], ids: &[usize]) -> (usize, usize) {
    let far = |from: usize| {
        ids.iter()
            .copied()
            .max_by(|&a, &b| {
                points[from]
                    .distance(&points[a])
                    .total_cmp(&points[from].distance(&points[b]))
            })
            .unwrap()
    };
    let a = far(ids[0]);
    let b = far(a);
    (a, b)
}
