//! Brute-force angle sweep for planar halfspace instances.
//!
//! Every common `α`-quantile line of two bodies is a zero of
//! `φ(θ) = g_1(θ) − g_2(θ)`. The sweep samples `φ` on a uniform grid, refines
//! each sign change by bisection in `θ`, and sorts the roots by the sign of
//! the orientation determinant of the section midpoints. It shares no code
//! with the solver beyond the area routine of the geometry kernel.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::halfspace::FractionVector;
use crate::point::Point;
use crate::separation::Family;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRoot {
    pub theta: f64,
    pub normal: Point,
    pub offset: f64,
    /// `det[(v,0), (p_1,1), (p_2,1)]` for the section midpoints `p_i`.
    pub orientation_det: f64,
    /// `|g_1(θ) − g_2(θ)|` at the refined angle.
    pub gap: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AngleSweep {
    pub positive: Vec<OracleRoot>,
    pub negative: Vec<OracleRoot>,
}

/// All common quantile lines of a planar two-body family.
pub fn oracle_angle_sweep(family: &Family, alpha: &FractionVector, grid: usize) -> Result<AngleSweep> {
    if family.dim() != 2 {
        return Err(Error::UnsupportedDimension(family.dim()));
    }
    if family.len() != 2 || alpha.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: family.len().min(alpha.len()),
        });
    }
    if grid < 3 {
        return Err(Error::InvalidInput("grid needs at least 3 angles".into()));
    }
    let bodies = family.bodies();
    let a = alpha.as_slice();
    let phi = |theta: f64| {
        let v = direction(theta);
        quantile(&bodies[0], &v, a[0]) - quantile(&bodies[1], &v, a[1])
    };
    let step = TAU / grid as f64;
    let values: Vec<f64> = (0..grid).map(|k| phi(k as f64 * step)).collect();
    let mut sweep = AngleSweep::default();
    let mut thetas: Vec<f64> = Vec::new();
    for k in 0..grid {
        let (fa, fb) = (values[k], values[(k + 1) % grid]);
        if (fa < 0.0) == (fb < 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (k as f64 * step, (k + 1) as f64 * step);
        let lo_negative = fa < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (phi(mid) < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = (0.5 * (lo + hi)).rem_euclid(TAU);
        // a touching zero on a grid node shows up as two sign changes
        if thetas.iter().any(|&s| angle_gap(s, theta) < 1e-9) {
            continue;
        }
        thetas.push(theta);
        let v = direction(theta);
        let t1 = quantile(&bodies[0], &v, a[0]);
        let t2 = quantile(&bodies[1], &v, a[1]);
        let t = 0.5 * (t1 + t2);
        let (Some(p1), Some(p2)) = (chord_midpoint(&bodies[0], &v, t), chord_midpoint(&bodies[1], &v, t)) else {
            continue;
        };
        let det = v[0] * (p1[1] - p2[1]) + v[1] * (p2[0] - p1[0]);
        let root = OracleRoot {
            theta,
            normal: v,
            offset: t,
            orientation_det: det,
            gap: (t1 - t2).abs(),
        };
        if det > 0.0 {
            sweep.positive.push(root);
        } else {
            sweep.negative.push(root);
        }
    }
    Ok(sweep)
}

pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn direction(theta: f64) -> Point {
    Point::new(&[theta.cos(), theta.sin()])
}

// Smallest t with area below reaching alpha·area, by plain bisection.
fn quantile(body: &Body, v: &Point, alpha: f64) -> f64 {
    let (mut lo, mut hi) = body.support_interval(v);
    let target = alpha * body.volume();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if body.volume_below(v, mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if alpha <= 0.0 {
        lo
    } else {
        hi
    }
}

// Midpoint of the chord {<v,x> = t} ∩ body, from the polygon edges.
fn chord_midpoint(body: &Body, v: &Point, t: f64) -> Option<Point> {
    let vs = body.vertices();
    let scale = body.scale().max(1.0);
    let mut hits: Vec<Point> = Vec::new();
    for &(i, j) in body.edges() {
        let (a, b) = (&vs[i], &vs[j]);
        let (sa, sb) = (v.dot(a) - t, v.dot(b) - t);
        if sa.abs() <= 1e-12 * scale {
            hits.push(a.clone());
        }
        if sb.abs() <= 1e-12 * scale {
            hits.push(b.clone());
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            hits.push(a.lerp(b, sa / (sa - sb)));
        }
    }
    if hits.is_empty() {
        return None;
    }
    // extremes along the line direction
    let u = Point::new(&[-v[1], v[0]]);
    let lo = hits.iter().min_by(|p, q| u.dot(p).total_cmp(&u.dot(q)))?;
    let hi = hits.iter().max_by(|p, q| u.dot(p).total_cmp(&u.dot(q)))?;
    Some(lo.lerp(hi, 0.5))
}
