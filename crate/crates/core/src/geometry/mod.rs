//! Exact convex-polytope primitives in dimensions 1 through 5.
//!
//! A [`Body`] keeps both representations of a full-dimensional polytope:
//! its vertex list and its facet inequalities. Clipping works on the
//! inequalities and re-enumerates vertices from the edge graph; volumes and
//! centroids come from a recursive cone decomposition over faces.

mod body;
mod faces;
pub mod nearest;
pub mod polygon;
mod section;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::tol;

pub use body::Body;
pub use section::{Section, SteinerEstimate};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 5;

/// The closed halfspace `{x : <normal, x> <= offset}` with a unit normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    normal: Point,
    offset: f64,
}

impl Halfspace {
    pub fn new(normal: Point, offset: f64) -> Result<Halfspace> {
        let n = normal.norm();
        if (n - 1.0).abs() >= tol::UNIT_NORM || !offset.is_finite() {
            return Err(Error::NotUnit(n));
        }
        Ok(Halfspace { normal, offset })
    }

    /// Rescales `(w, c)` so that the normal has unit length.
    pub fn from_unnormalized(w: &Point, c: f64) -> Result<Halfspace> {
        let n = w.norm();
        if n == 0.0 || !n.is_finite() || !c.is_finite() {
            return Err(Error::NotUnit(n));
        }
        Ok(Halfspace {
            normal: w.scaled(1.0 / n),
            offset: c / n,
        })
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// Signed distance of `x` from the bounding hyperplane (negative inside).
    pub fn signed_distance(&self, x: &Point) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn contains(&self, x: &Point, eps: f64) -> bool {
        self.signed_distance(x) <= eps
    }

    /// `{x : <-v, x> <= -t}`, the opposite closed halfspace.
    pub fn complement(&self) -> Halfspace {
        Halfspace {
            normal: self.normal.scaled(-1.0),
            offset: -self.offset,
        }
    }
}
