//! Transversal spheres through the paraboloid lifting `ℓ(x) = (x, |x|²)`.
//!
//! The sphere `S(u, r)` lifts to the hyperplane `x_{d+1} = 2<u, x> + r² − |u|²`,
//! and the ball `B(u, r)` is exactly the set of base points whose lift lies
//! on or below it. Solving the halfspace problem for the lifted measures of
//! `d + 1` bodies in `R^{d+1}` therefore yields the sphere.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::polygon;
use crate::geometry::{Body, Halfspace};
use crate::halfspace::{solve, FractionVector, SolveOptions, SolveReport, TransversalProblem};
use crate::measures::{LiftedBody, Measure, MeasureSpec};
use crate::point::{det, Point};
use crate::separation::{check_well_separated, Family, WellSeparationReport};
use crate::tol;

pub use crate::measures::lift_point;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sphere {
    pub center: Point,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Point, radius: f64) -> Result<Sphere> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::InvalidInput(format!("invalid sphere radius {radius}")));
        }
        Ok(Sphere { center, radius })
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.distance(&self.center) <= self.radius
    }
}

/// What a lifted hyperplane cuts out of the base.
#[derive(Clone, Debug, PartialEq)]
pub enum LiftedSlice {
    /// The halfspace below the hyperplane pulls back to the ball.
    Ball(Sphere),
    /// The halfspace below pulls back to the closed exterior of the sphere.
    BallComplement(Sphere),
    /// A vertical hyperplane: the base halfspace it projects to.
    Vertical(Halfspace),
}

/// Interprets `{x̄ : <w, x̄> <= c}` in `R^{d+1}` in the base `R^d`.
pub fn halfspace_to_sphere(w: &Point, c: f64) -> Result<LiftedSlice> {
    let d = w.dim() - 1;
    let wb = w.truncated();
    let last = w[d];
    if last.abs() <= 1e-14 * w.norm() {
        return Ok(LiftedSlice::Vertical(Halfspace::from_unnormalized(&wb, c)?));
    }
    let u = wb.scaled(-0.5 / last);
    let r2 = c / last + u.norm_sq();
    if r2 <= 0.0 {
        return Err(Error::NoIntersection);
    }
    let s = Sphere::new(u, r2.sqrt())?;
    Ok(if last > 0.0 {
        LiftedSlice::Ball(s)
    } else {
        LiftedSlice::BallComplement(s)
    })
}

/// The unit normal `w` and offset `c` with `{<w, ·> <= c}` pulling back to
/// the ball `B(u, r)`.
pub fn sphere_to_halfspace(s: &Sphere) -> Halfspace {
    let w = s.center.scaled(-2.0).extended(1.0);
    let c = s.radius * s.radius - s.center.norm_sq();
    Halfspace::from_unnormalized(&w, c).expect("lifted normal is nonzero")
}

/// The lifted halfspace problem for `d + 1` bodies in `R^d`.
#[derive(Clone, Debug)]
pub struct LiftedInstance {
    problem: TransversalProblem,
    base_separation: WellSeparationReport,
    order: Vec<usize>,
}

impl LiftedInstance {
    pub fn problem(&self) -> &TransversalProblem {
        &self.problem
    }

    pub fn base_separation(&self) -> &WellSeparationReport {
        &self.base_separation
    }

    pub fn lifted_separation(&self) -> &WellSeparationReport {
        self.problem.separation()
    }

    /// `order[k]` is the base index of lifted body `k`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Lifts a well-separated family of `d + 1` bodies. The lifted order puts
/// the ball on the positive side: the last coordinate of a positively
/// oriented lifted normal has the sign of `(−1)^d det[(x_i, 1)]` for base
/// points `x_i`, so the first two bodies are swapped when that is negative.
pub fn build_lifted_instance(family: &Family) -> Result<LiftedInstance> {
    let d = family.dim();
    if family.len() != d + 1 {
        return Err(Error::InvalidInput(format!(
            "{} bodies in dimension {d}; exactly {} are needed",
            family.len(),
            d + 1
        )));
    }
    let base_separation = match family.certificate() {
        Some(r) => r.clone(),
        None => check_well_separated(family, tol::MARGIN),
    };
    if !base_separation.ok {
        return Err(Error::NotWellSeparated(Box::new(base_separation)));
    }
    let centroids: Vec<&Point> = family.bodies().iter().map(|b| b.centroid()).collect();
    let mut order: Vec<usize> = (0..=d).collect();
    if base_orientation(&centroids) < 0.0 {
        order.swap(0, 1);
    }
    let measures = order
        .iter()
        .map(|&k| LiftedBody::new(family.bodies()[k].clone()).map(MeasureSpec::LiftedVolume))
        .collect::<Result<Vec<_>>>()?;
    let problem = TransversalProblem::from_measures(measures)?;
    Ok(LiftedInstance {
        problem,
        base_separation,
        order,
    })
}

// Sign-corrected det[(x_1, 1), …, (x_{d+1}, 1)].
fn base_orientation(points: &[&Point]) -> f64 {
    let d = points[0].dim();
    let rows: Vec<Vec<f64>> = (0..=d)
        .map(|r| points.iter().map(|p| if r == d { 1.0 } else { p[r] }).collect())
        .collect();
    let sign = if d.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * det(&rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereSolution {
    pub sphere: Sphere,
    /// Achieved `Vol(B ∩ K_i) / Vol(K_i)` in base order.
    pub ball_fractions: Vec<f64>,
    pub residual: f64,
    /// The lifted solve, in lifted order.
    pub lifted: SolveReport,
}

/// The transversal sphere with ball fractions `alpha` (in family order).
pub fn solve_sphere(family: &Family, alpha: &FractionVector, opts: &SolveOptions) -> Result<SphereSolution> {
    let instance = build_lifted_instance(family)?;
    solve_lifted(family, &instance, alpha, opts)
}

/// As [`solve_sphere`], reusing a lifted instance.
pub fn solve_lifted(
    family: &Family,
    instance: &LiftedInstance,
    alpha: &FractionVector,
    opts: &SolveOptions,
) -> Result<SphereSolution> {
    if alpha.len() != family.len() {
        return Err(Error::DimensionMismatch {
            expected: family.len(),
            found: alpha.len(),
        });
    }
    let lifted_alpha = FractionVector::new(instance.order.iter().map(|&k| alpha.as_slice()[k]).collect())?;
    let report = solve(&instance.problem, &lifted_alpha, opts)?;
    let sphere = match halfspace_to_sphere(report.normal(), report.offset())? {
        LiftedSlice::Ball(s) => s,
        LiftedSlice::BallComplement(_) => {
            return Err(Error::InvalidInput(
                "lifted solution keeps the sphere exterior; body order is inconsistent".into(),
            ))
        }
        LiftedSlice::Vertical(_) => return Err(Error::VerticalSolution),
    };
    let lifted_ball = sphere_to_halfspace(&sphere);
    let ball_fractions: Vec<f64> = (0..family.len())
        .map(|k| {
            let body = &family.bodies()[k];
            if body.dim() <= 2 {
                return ball_mass(body, &sphere) / body.volume();
            }
            // reuse the instance's sample cloud
            let pos = instance.order.iter().position(|&j| j == k).unwrap();
            let m = &instance.problem.measures()[pos];
            m.mass_below(lifted_ball.normal(), lifted_ball.offset()) / m.total_mass()
        })
        .collect();
    let residual = ball_fractions
        .iter()
        .zip(alpha.as_slice())
        .map(|(f, a)| (f - a).abs())
        .fold(0.0, f64::max);
    let tol = instance.problem.effective_tol(opts.residual_tol);
    let solution = SphereSolution {
        sphere,
        ball_fractions,
        residual,
        lifted: report,
    };
    if residual > tol.max(1e-8) {
        let mut best = solution.lifted;
        best.residual = residual;
        best.converged = false;
        return Err(Error::NoConvergence { best: Box::new(best) });
    }
    Ok(solution)
}

/// `Vol(B(u, r) ∩ K)`: exact on the line and in the plane, quasi-Monte
/// Carlo above.
pub fn ball_mass(body: &Body, s: &Sphere) -> f64 {
    match body.dim() {
        1 => {
            let (a, b) = (body.vertices()[0][0], body.vertices()[1][0]);
            let (lo, hi) = (s.center[0] - s.radius, s.center[0] + s.radius);
            (hi.min(b) - lo.max(a)).max(0.0)
        }
        2 => polygon::disk_area(&body.polygon(), [s.center[0], s.center[1]], s.radius),
        _ => {
            let h = sphere_to_halfspace(s);
            match LiftedBody::new(body.clone()) {
                Ok(l) => MeasureSpec::LiftedVolume(l).mass_below(h.normal(), h.offset()),
                Err(_) => f64::NAN,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lift_examples() {
        assert_eq!(lift_point(&Point::new(&[0.0, 0.0])).coords(), &[0.0, 0.0, 0.0]);
        assert_eq!(lift_point(&Point::new(&[1.0, 2.0])).coords(), &[1.0, 2.0, 5.0]);
    }

    #[test]
    fn horizontal_plane_is_a_centered_circle() {
        match halfspace_to_sphere(&Point::new(&[0.0, 0.0, 1.0]), 4.0).unwrap() {
            LiftedSlice::Ball(s) => {
                assert_eq!(s.center.coords(), &[0.0, 0.0]);
                assert_eq!(s.radius, 2.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tilted_plane_is_a_shifted_circle() {
        // x_3 = 2 x_1, written as <(-2, 0, 1), x> <= 0
        let w = Point::new(&[-2.0, 0.0, 1.0]).normalized().unwrap();
        match halfspace_to_sphere(&w, 0.0).unwrap() {
            LiftedSlice::Ball(s) => {
                assert!(s.center.distance(&Point::new(&[1.0, 0.0])) < 1e-15);
                assert!((s.radius - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_and_vertical_planes() {
        assert!(matches!(
            halfspace_to_sphere(&Point::new(&[0.0, 0.0, 1.0]), -1.0),
            Err(Error::NoIntersection)
        ));
        assert!(matches!(
            halfspace_to_sphere(&Point::new(&[1.0, 0.0, 0.0]), 2.0).unwrap(),
            LiftedSlice::Vertical(_)
        ));
    }

    #[test]
    fn round_trip_and_side_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let u = Point::new(&[rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]);
            let r = rng.gen_range(0.1..6.0);
            let s = Sphere::new(u.clone(), r).unwrap();
            let h = sphere_to_halfspace(&s);
            let LiftedSlice::Ball(back) = halfspace_to_sphere(h.normal(), h.offset()).unwrap() else {
                panic!("ball expected");
            };
            assert!(back.center.distance(&u) < 1e-12 && (back.radius - r).abs() < 1e-12);
            // below the lifted plane ⇔ inside the ball
            let x = Point::new(&[rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)]);
            let below = h.signed_distance(&lift_point(&x)) <= 0.0;
            assert_eq!(below, s.contains(&x));
        }
    }
}

