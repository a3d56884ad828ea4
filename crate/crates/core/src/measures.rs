//! Nice measures: uniform volume on a body, and the lifted measure whose
//! mass of a region `C ⊂ R^{d+1}` is the base volume of `{x ∈ K : ℓ(x) ∈ C}`
//! with `ℓ(x) = (x, |x|²)`.
//!
//! Every query takes an ambient direction `v` and offset `t` and concerns the
//! halfspace `{<v, ·> <= t}`. For the lifted measure that halfspace pulls
//! back to a ball, a ball complement or a halfspace of the base.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::polygon::{self, P2};
use crate::geometry::Body;
use crate::point::Point;
use crate::sampling::{halton, unit_vector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportInterval {
    pub t0: f64,
    pub t1: f64,
}

impl SupportInterval {
    pub fn width(&self) -> f64 {
        self.t1 - self.t0
    }
}

/// A finite measure on `R^n` queried through halfspaces.
pub trait Measure {
    fn ambient_dim(&self) -> usize;

    fn total_mass(&self) -> f64;

    fn support_interval(&self, v: &Point) -> SupportInterval;

    /// `μ({x : <v, x> <= t})`.
    fn mass_below(&self, v: &Point, t: f64) -> f64;

    /// Absolute bound on the error of [`Measure::mass_below`].
    fn mass_error_bound(&self) -> f64 {
        0.0
    }

    /// Diameter of the support, used to scale probe thresholds.
    fn diameter(&self) -> f64;

    /// The offset `t` with `μ(<v,·> <= t) = alpha · μ(R^n)`.
    fn quantile(&self, v: &Point, alpha: f64, tol: f64) -> Result<f64> {
        bracketed_quantile(self, v, alpha, tol)
    }
}

/// How a point is chosen inside a section `support ∩ {<v,·> = t}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    #[default]
    Centroid,
    Steiner,
}

/// Sample count for the Monte Carlo Steiner point.
pub const STEINER_SAMPLES: usize = 20_000;

#[derive(Clone, Debug)]
pub enum MeasureSpec {
    UniformOnBody(Body),
    LiftedVolume(LiftedBody),
}

impl MeasureSpec {
    pub fn uniform(body: Body) -> MeasureSpec {
        MeasureSpec::UniformOnBody(body)
    }

    pub fn lifted(base: Body) -> Result<MeasureSpec> {
        Ok(MeasureSpec::LiftedVolume(LiftedBody::new(base)?))
    }

    /// The body the measure is defined from (the base body when lifted).
    pub fn body(&self) -> &Body {
        match self {
            MeasureSpec::UniformOnBody(b) => b,
            MeasureSpec::LiftedVolume(l) => l.base(),
        }
    }

    /// A point of the section `support ∩ {<v,·> = t}` chosen continuously
    /// in `(v, t)`, or `None` when the hyperplane misses the support.
    pub fn selection_point(&self, v: &Point, t: f64, rule: SelectionRule, seed: u64) -> Option<Point> {
        match self {
            MeasureSpec::UniformOnBody(b) => {
                let s = b.section(v, t)?;
                Some(match rule {
                    SelectionRule::Centroid => s.centroid(),
                    SelectionRule::Steiner => s.steiner_point_estimate(STEINER_SAMPLES, seed).point,
                })
            }
            MeasureSpec::LiftedVolume(l) => l.section_average(v, t),
        }
    }

    /// Finite point set whose hull is (an inner approximation of) the support.
    pub fn support_points(&self) -> Vec<Point> {
        match self {
            MeasureSpec::UniformOnBody(b) => b.vertices().to_vec(),
            MeasureSpec::LiftedVolume(l) => l.support_points(),
        }
    }

    /// Moves `x` into the support (approximately, for the lifted measure).
    pub fn project(&self, x: &Point) -> Point {
        match self {
            MeasureSpec::UniformOnBody(b) => b.project(x),
            MeasureSpec::LiftedVolume(l) => l.project(x),
        }
    }

    /// Whether `x` lies in the support within `eps`.
    pub fn support_contains(&self, x: &Point, eps: f64) -> bool {
        match self {
            MeasureSpec::UniformOnBody(b) => b.max_violation(x) <= eps,
            MeasureSpec::LiftedVolume(l) => l.contains(x, eps),
        }
    }

    /// A random point of the support.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            MeasureSpec::UniformOnBody(b) => b.random_point(rng),
            MeasureSpec::LiftedVolume(l) => lift_point(&l.base().random_point(rng)),
        }
    }

    /// A fixed interior point of the support.
    pub fn center(&self) -> Point {
        match self {
            MeasureSpec::UniformOnBody(b) => b.centroid().clone(),
            MeasureSpec::LiftedVolume(l) => lift_point(l.base().centroid()),
        }
    }

    /// Point of the support where `<v,·>` attains `t0` (`low`) or `t1`.
    pub fn extreme_point(&self, v: &Point, low: bool) -> Point {
        match self {
            MeasureSpec::UniformOnBody(b) => b.extreme_vertex(v, !low).clone(),
            MeasureSpec::LiftedVolume(l) => lift_point(&l.extremes(v).pick(low).0),
        }
    }
}

impl Measure for MeasureSpec {
    fn ambient_dim(&self) -> usize {
        match self {
            MeasureSpec::UniformOnBody(b) => b.dim(),
            MeasureSpec::LiftedVolume(l) => l.base().dim() + 1,
        }
    }

    fn total_mass(&self) -> f64 {
        self.body().volume()
    }

    fn support_interval(&self, v: &Point) -> SupportInterval {
        match self {
            MeasureSpec::UniformOnBody(b) => {
                let (t0, t1) = b.support_interval(v);
                SupportInterval { t0, t1 }
            }
            MeasureSpec::LiftedVolume(l) => {
                let e = l.extremes(v);
                SupportInterval {
                    t0: e.low.1,
                    t1: e.high.1,
                }
            }
        }
    }

    fn mass_below(&self, v: &Point, t: f64) -> f64 {
        match self {
            MeasureSpec::UniformOnBody(b) => b.volume_below(v, t),
            MeasureSpec::LiftedVolume(l) => l.mass_below(v, t),
        }
    }

    fn mass_error_bound(&self) -> f64 {
        match self {
            MeasureSpec::UniformOnBody(_) => 0.0,
            MeasureSpec::LiftedVolume(l) => l.mass_error_bound(),
        }
    }

    fn diameter(&self) -> f64 {
        match self {
            MeasureSpec::UniformOnBody(b) => b.scale(),
            MeasureSpec::LiftedVolume(l) => {
                let pts = l.support_points();
                let mut d: f64 = 0.0;
                for p in &pts {
                    for q in &pts {
                        d = d.max(p.distance(q));
                    }
                }
                d
            }
        }
    }

    fn quantile(&self, v: &Point, alpha: f64, tol: f64) -> Result<f64> {
        match self {
            MeasureSpec::LiftedVolume(l) if l.cloud.is_some() => l.cloud_quantile(v, alpha, tol),
            _ => bracketed_quantile(self, v, alpha, tol),
        }
    }
}

/// `ℓ(x) = (x, |x|²)`.
pub fn lift_point(x: &Point) -> Point {
    x.extended(x.norm_sq())
}

/// Default number of quasi-random points for bases of dimension 3 or more.
pub const DEFAULT_CLOUD_SIZE: usize = 1_000_000;

const SUPPORT_GRID_PER_FACET: usize = 64;

// Above this ratio of |centre| to body radius a lifted ball is treated as
// the halfspace it approximates.
const FAR_CENTER_RATIO: f64 = 1e7;

/// The lifted-volume measure over a base body.
#[derive(Clone, Debug)]
pub struct LiftedBody {
    base: Body,
    radius: f64,
    cloud: Option<Arc<Cloud>>,
}

// Quasi-uniform points of the base body, stored flat with stride `dim`.
#[derive(Debug)]
struct Cloud {
    dim: usize,
    coords: Vec<f64>,
    norms_sq: Vec<f64>,
}

impl Cloud {
    fn len(&self) -> usize {
        self.norms_sq.len()
    }

    fn values<'a>(&'a self, w: &'a [f64], last: f64) -> impl Iterator<Item = f64> + 'a {
        self.coords
            .chunks_exact(self.dim)
            .zip(&self.norms_sq)
            .map(move |(x, n)| x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + last * n)
    }
}

// Base-space extremes of q(x) = <w', x> + w_last |x|^2 over the body.
struct Extremes {
    low: (Point, f64),
    high: (Point, f64),
}

impl Extremes {
    fn pick(self, low: bool) -> (Point, f64) {
        if low {
            self.low
        } else {
            self.high
        }
    }
}

impl LiftedBody {
    pub fn new(base: Body) -> Result<LiftedBody> {
        LiftedBody::with_cloud(base, DEFAULT_CLOUD_SIZE, 0)
    }

    /// Bases of dimension 3 or more use `samples` quasi-random points,
    /// rotated by `seed`; lower dimensions are exact and ignore both.
    pub fn with_cloud(base: Body, samples: usize, seed: u64) -> Result<LiftedBody> {
        if base.dim() + 1 > crate::geometry::MAX_DIM {
            return Err(Error::UnsupportedDimension(base.dim() + 1));
        }
        let radius = base.vertices().iter().map(|p| p.norm()).fold(0.0, f64::max);
        let cloud = (base.dim() >= 3).then(|| Arc::new(build_cloud(&base, samples.max(1), seed)));
        Ok(LiftedBody {
            base,
            radius,
            cloud,
        })
    }

    pub fn base(&self) -> &Body {
        &self.base
    }

    fn split(w: &Point) -> (Point, f64) {
        (w.truncated(), w[w.dim() - 1])
    }

    // Centre u and squared radius of {q(x) = t} for a non-negligible w_last.
    fn ball(&self, w: &Point, t: f64) -> Option<(Point, f64)> {
        let (wb, last) = Self::split(w);
        if last == 0.0 {
            return None;
        }
        let u = wb.scaled(-0.5 / last);
        if !u.is_finite() || u.norm() > FAR_CENTER_RATIO * (self.radius + 1.0) {
            return None;
        }
        let r2 = t / last + u.norm_sq();
        Some((u, r2))
    }

    fn q(w: &Point, x: &Point) -> f64 {
        let (wb, last) = Self::split(w);
        wb.dot(x) + last * x.norm_sq()
    }

    fn extremes(&self, w: &Point) -> Extremes {
        let (wb, last) = Self::split(w);
        let by_vertex = |max: bool| {
            self.base
                .vertices()
                .iter()
                .map(|p| (p.clone(), Self::q(w, p)))
                .max_by(|a, b| if max { a.1.total_cmp(&b.1) } else { b.1.total_cmp(&a.1) })
                .unwrap()
        };
        if last == 0.0 {
            return Extremes {
                low: by_vertex(false),
                high: by_vertex(true),
            };
        }
        // q is convex (concave) along the base when last > 0 (< 0); its
        // other extreme sits at the point of K nearest to the vertex of q.
        let u = wb.scaled(-0.5 / last);
        let inner = if u.is_finite() {
            let p = self.base.nearest_point(&u);
            let v = Self::q(w, &p);
            Some((p, v))
        } else {
            None
        };
        let better = |a: (Point, f64), b: Option<(Point, f64)>, low: bool| match b {
            Some(b) if (low && b.1 < a.1) || (!low && b.1 > a.1) => b,
            _ => a,
        };
        if last > 0.0 {
            Extremes {
                low: better(by_vertex(false), inner, true),
                high: by_vertex(true),
            }
        } else {
            Extremes {
                low: by_vertex(false),
                high: better(by_vertex(true), inner, false),
            }
        }
    }

    /// Base volume of `{x ∈ K : <w', x> + w_last |x|² <= t}`.
    pub fn mass_below(&self, w: &Point, t: f64) -> f64 {
        let (wb, last) = Self::split(w);
        let vol = self.base.volume();
        if let Some(cloud) = &self.cloud {
            let count = cloud.values(&wb, last).filter(|&q| q <= t).count();
            return vol * count as f64 / cloud.len() as f64;
        }
        if self.base.dim() == 1 {
            return self.interval_mass(&wb, last, t);
        }
        match self.ball(w, t) {
            None => self.base.volume_below(&wb, t),
            Some((u, r2)) => {
                let inside = if r2 <= 0.0 {
                    0.0
                } else {
                    polygon::disk_area(&self.base.polygon(), [u[0], u[1]], r2.sqrt())
                };
                if last > 0.0 {
                    inside.min(vol)
                } else {
                    (vol - inside).max(0.0)
                }
            }
        }
    }

    fn interval_mass(&self, wb: &Point, last: f64, t: f64) -> f64 {
        let (a, b) = (self.base.vertices()[0][0], self.base.vertices()[1][0]);
        let len = |lo: f64, hi: f64| (hi.min(b) - lo.max(a)).max(0.0);
        match self.interval_roots(wb[0], last, t) {
            Roots::Linear(x) => {
                if wb[0] > 0.0 {
                    len(a, x)
                } else if wb[0] < 0.0 {
                    len(x, b)
                } else if t >= 0.0 {
                    b - a
                } else {
                    0.0
                }
            }
            Roots::Pair(x0, x1) => {
                let inner = len(x0, x1);
                if last > 0.0 {
                    inner
                } else {
                    (b - a) - inner
                }
            }
            Roots::None => {
                if last > 0.0 {
                    0.0
                } else {
                    b - a
                }
            }
        }
    }

    // Roots of last·x² + w·x − t, with a near-zero `last` read as linear.
    fn interval_roots(&self, w: f64, last: f64, t: f64) -> Roots {
        let r = self.radius + 1.0;
        if last.abs() * r * r <= 1e-15 * (w.abs() * r + t.abs()) {
            return Roots::Linear(if w == 0.0 { 0.0 } else { t / w });
        }
        let disc = w * w + 4.0 * last * t;
        if disc < 0.0 {
            return Roots::None;
        }
        let s = disc.sqrt();
        let qq = -0.5 * (w + w.signum() * s);
        let (x0, x1) = if qq == 0.0 {
            (0.0, 0.0)
        } else {
            (qq / last, -t / qq)
        };
        Roots::Pair(x0.min(x1), x0.max(x1))
    }

    fn mass_error_bound(&self) -> f64 {
        match &self.cloud {
            // three binomial standard deviations at the worst case p = 1/2
            Some(c) => 1.5 * self.base.volume() / (c.len() as f64).sqrt(),
            None => 0.0,
        }
    }

    fn cloud_quantile(&self, w: &Point, alpha: f64, tol: f64) -> Result<f64> {
        check_fraction(alpha)?;
        let bound = self.mass_error_bound() / self.base.volume();
        if bound > tol {
            return Err(Error::ToleranceUnreachable { bound, tol });
        }
        let e = self.extremes(w);
        if alpha <= 0.0 {
            return Ok(e.low.1);
        }
        if alpha >= 1.0 {
            return Ok(e.high.1);
        }
        let cloud = self.cloud.as_ref().unwrap();
        let (wb, last) = Self::split(w);
        let mut vals: Vec<f64> = cloud.values(&wb, last).collect();
        let k = ((alpha * vals.len() as f64).ceil() as usize).clamp(1, vals.len()) - 1;
        let (_, kth, _) = vals.select_nth_unstable_by(k, f64::total_cmp);
        Ok(*kth)
    }

    /// Average of `ℓ(x)` over the base points with `q(x) = t`, weighted by
    /// arc length in the plane; the extreme point when the set degenerates.
    fn section_average(&self, w: &Point, t: f64) -> Option<Point> {
        let e = self.extremes(w);
        let span = (e.high.1 - e.low.1).max(f64::MIN_POSITIVE);
        let slack = 1e-12 * span.max(1.0);
        if t < e.low.1 - slack || t > e.high.1 + slack {
            return None;
        }
        let fallback = |e: Extremes| {
            let low = (t - e.low.1).abs() <= (t - e.high.1).abs();
            Some(lift_point(&e.pick(low).0))
        };
        let (wb, last) = Self::split(w);
        let dim = self.base.dim();
        if dim == 1 {
            let (a, b) = (self.base.vertices()[0][0], self.base.vertices()[1][0]);
            let roots: Vec<f64> = match self.interval_roots(wb[0], last, t) {
                Roots::Linear(x) => vec![x],
                Roots::Pair(x0, x1) => vec![x0, x1],
                Roots::None => vec![],
            };
            let eps = self.base.plane_tolerance();
            let inside: Vec<Point> = roots
                .into_iter()
                .filter(|x| (a - eps..=b + eps).contains(x))
                .map(|x| lift_point(&Point::new(&[x.clamp(a, b)])))
                .collect();
            return match Point::mean(&inside) {
                Some(p) => Some(p),
                None => fallback(e),
            };
        }
        let Some((u, r2)) = self.ball(w, t) else {
            // a hyperplane section of the base lifted along the chord average
            let n = wb.norm();
            let section = self.base.section(&wb.scaled(1.0 / n), t / n)?;
            let verts = section.vertices();
            let x = section.centroid();
            let y = if dim == 2 && verts.len() == 2 {
                let (p, q) = (&verts[0], &verts[1]);
                (p.norm_sq() + p.dot(q) + q.norm_sq()) / 3.0
            } else {
                verts.iter().map(|p| p.norm_sq()).sum::<f64>() / verts.len() as f64
            };
            return Some(x.extended(y));
        };
        if r2 <= 0.0 {
            return fallback(e);
        }
        let r = r2.sqrt();
        if dim == 2 {
            let poly = self.base.polygon();
            let arcs = polygon::circle_arcs(&poly, [u[0], u[1]], r, self.base.plane_tolerance());
            let total: f64 = arcs.iter().map(|(a, b)| b - a).sum();
            if total * r <= 1e-9 * self.base.scale() {
                return fallback(e);
            }
            let (mut cx, mut cy) = (0.0, 0.0);
            for (a, b) in &arcs {
                cx += b.sin() - a.sin();
                cy += a.cos() - b.cos();
            }
            let m: P2 = [u[0] + r * cx / total, u[1] + r * cy / total];
            let x = Point::new(&m);
            let y = u.norm_sq() + r2 + 2.0 * (u[0] * (m[0] - u[0]) + u[1] * (m[1] - u[1]));
            return Some(x.extended(y));
        }
        // fixed pseudo-random directions on the sphere S(u, r)
        let eps = self.base.plane_tolerance();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let inside: Vec<Point> = (0..4096)
            .map(|_| u.axpy(r, &unit_vector(&mut rng, dim)))
            .filter(|x| self.base.max_violation(x) <= eps)
            .collect();
        match Point::mean(&inside) {
            Some(x) => {
                let y = (t - wb.dot(&x)) / last;
                Some(x.extended(y))
            }
            None => fallback(e),
        }
    }

    /// Lifted vertices plus a fixed grid of lifted points on every facet.
    pub fn support_points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = self.base.vertices().iter().map(lift_point).collect();
        let dim = self.base.dim();
        if dim == 1 {
            let (a, b) = (self.base.vertices()[0][0], self.base.vertices()[1][0]);
            for k in 1..SUPPORT_GRID_PER_FACET {
                let x = a + (b - a) * k as f64 / SUPPORT_GRID_PER_FACET as f64;
                out.push(lift_point(&Point::new(&[x])));
            }
            return out;
        }
        let eps = self.base.plane_tolerance();
        for f in self.base.facets() {
            let verts: Vec<&Point> = self
                .base
                .vertices()
                .iter()
                .filter(|p| f.signed_distance(p).abs() <= eps)
                .collect();
            let shift = vec![0.0; verts.len()];
            for k in 0..SUPPORT_GRID_PER_FACET as u64 {
                let x = if verts.len() == 2 {
                    let s = (k + 1) as f64 / (SUPPORT_GRID_PER_FACET + 1) as f64;
                    verts[0].lerp(verts[1], s)
                } else {
                    let h = halton(k, verts.len().min(8), &shift);
                    let weights: Vec<f64> = h.iter().map(|s| -(1.0 - s).ln()).collect();
                    let total: f64 = weights.iter().sum();
                    let mut x = Point::zeros(dim);
                    for (p, wi) in verts.iter().zip(&weights) {
                        x = x.axpy(wi / total, p);
                    }
                    x
                };
                out.push(lift_point(&x));
            }
        }
        out
    }

    // Nearest base point, then the height clamped between the paraboloid
    // and the highest lifted vertex.
    fn project(&self, x: &Point) -> Point {
        let base = self.base.project(&x.truncated());
        let top = self.base.vertices().iter().map(|p| p.norm_sq()).fold(0.0, f64::max);
        let y = x[x.dim() - 1].clamp(base.norm_sq(), top.max(base.norm_sq()));
        base.extended(y)
    }

    fn contains(&self, x: &Point, eps: f64) -> bool {
        let base = x.truncated();
        self.base.max_violation(&base) <= eps && x[x.dim() - 1] >= base.norm_sq() - eps
    }
}

enum Roots {
    Linear(f64),
    Pair(f64, f64),
    None,
}

fn build_cloud(base: &Body, samples: usize, seed: u64) -> Cloud {
    let dim = base.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen()).collect();
    let lo: Vec<f64> = (0..dim)
        .map(|k| base.vertices().iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..dim)
        .map(|k| base.vertices().iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mut coords = Vec::with_capacity(samples * dim);
    let mut norms_sq = Vec::with_capacity(samples);
    let mut index = 0u64;
    while norms_sq.len() < samples {
        let h = halton(index, dim, &shift);
        index += 1;
        let x = Point::from((0..dim).map(|k| lo[k] + h[k] * (hi[k] - lo[k])).collect::<Vec<_>>());
        if base.max_violation(&x) <= 0.0 {
            coords.extend_from_slice(x.coords());
            norms_sq.push(x.norm_sq());
        }
    }
    Cloud {
        dim,
        coords,
        norms_sq,
    }
}

fn check_fraction(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidFraction(alpha))
    }
}

fn check_dim<M: Measure + ?Sized>(mu: &M, v: &Point) -> Result<()> {
    if v.dim() != mu.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.ambient_dim(),
            found: v.dim(),
        });
    }
    Ok(())
}

pub fn mass_below<M: Measure + ?Sized>(mu: &M, v: &Point, t: f64) -> Result<f64> {
    check_dim(mu, v)?;
    Ok(mu.mass_below(v, t))
}

pub fn support_interval_of<M: Measure + ?Sized>(mu: &M, v: &Point) -> Result<SupportInterval> {
    check_dim(mu, v)?;
    Ok(mu.support_interval(v))
}

/// `μ(s0 <= <v,·> <= s1)`.
pub fn slab_mass<M: Measure + ?Sized>(mu: &M, v: &Point, s0: f64, s1: f64) -> Result<f64> {
    check_dim(mu, v)?;
    if s1 <= s0 {
        return Ok(0.0);
    }
    Ok((mu.mass_below(v, s1) - mu.mass_below(v, s0)).max(0.0))
}

pub fn quantile<M: Measure + ?Sized>(mu: &M, v: &Point, alpha: f64, tol: f64) -> Result<f64> {
    check_dim(mu, v)?;
    mu.quantile(v, alpha, tol)
}

/// Root of `t ↦ mass_below(v, t) / total − alpha` on the support interval.
/// Bisection, with Illinois false-position steps whenever they shrink the
/// bracket at least as fast; stops at `|residual| <= tol`, at a bracket
/// narrower than `1e-13` of the support width, or after 60 steps.
pub fn bracketed_quantile<M: Measure + ?Sized>(mu: &M, v: &Point, alpha: f64, tol: f64) -> Result<f64> {
    check_fraction(alpha)?;
    let total = mu.total_mass();
    let bound = mu.mass_error_bound() / total;
    if bound > tol {
        return Err(Error::ToleranceUnreachable { bound, tol });
    }
    let SupportInterval { t0, t1 } = mu.support_interval(v);
    if alpha <= 0.0 {
        return Ok(t0);
    }
    if alpha >= 1.0 {
        return Ok(t1);
    }
    let f = |t: f64| mu.mass_below(v, t) / total - alpha;
    let (mut lo, mut hi) = (t0, t1);
    let (mut flo, mut fhi) = (-alpha, 1.0 - alpha);
    let min_width = 1e-13 * (t1 - t0);
    let mut last_side = 0i8;
    let mut width_before = hi - lo;
    let mut best = (f64::INFINITY, 0.5 * (lo + hi));
    for step in 0..60 {
        if hi - lo <= min_width {
            break;
        }
        // a bisection every other step unless false position halved the bracket
        let secant_ok = step % 2 == 0 || hi - lo <= 0.5 * width_before;
        if step % 2 == 0 {
            width_before = hi - lo;
        }
        let mut t = if secant_ok && fhi > flo {
            lo - flo * (hi - lo) / (fhi - flo)
        } else {
            0.5 * (lo + hi)
        };
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let ft = f(t);
        if ft.abs() < best.0 {
            best = (ft.abs(), t);
        }
        if ft.abs() <= tol {
            return Ok(t);
        }
        if ft < 0.0 {
            lo = t;
            flo = ft;
            if last_side < 0 {
                fhi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = t;
            fhi = ft;
            if last_side > 0 {
                flo *= 0.5;
            }
            last_side = 1;
        }
    }
    if hi - lo <= min_width {
        return Ok(0.5 * (lo + hi));
    }
    Ok(best.1)
}

/// Empirical check of the three niceness conditions along random directions.
#[derive(Clone, Debug, Default, Serialize)]
pub struct NicenessReport {
    pub directions: usize,
    /// (i) support intervals that are not finite with `t0 < t1`.
    pub unbounded_support: usize,
    /// (ii) hyperplanes carrying more than `1e-9` of the total mass.
    pub heavy_hyperplanes: usize,
    pub max_hyperplane_fraction: f64,
    /// (iii) interior sub-slabs carrying no mass.
    pub empty_slabs: usize,
}

impl NicenessReport {
    pub fn is_nice(&self) -> bool {
        self.unbounded_support == 0 && self.heavy_hyperplanes == 0 && self.empty_slabs == 0
    }
}

pub fn niceness_probe<M: Measure + ?Sized>(mu: &M, directions: usize, seed: u64) -> NicenessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = mu.total_mass();
    let mut report = NicenessReport {
        directions,
        ..NicenessReport::default()
    };
    const SLABS_PER_DIRECTION: usize = 8;
    for _ in 0..directions {
        let v = unit_vector(&mut rng, mu.ambient_dim());
        let SupportInterval { t0, t1 } = mu.support_interval(&v);
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            report.unbounded_support += 1;
            continue;
        }
        let w = t1 - t0;
        // a hyperplane's mass is the limit of ever thinner slabs around it
        let t = t0 + w * rng.gen::<f64>();
        let h = 1e-12 * w;
        let thin = (mu.mass_below(&v, t + h) - mu.mass_below(&v, t - h)).max(0.0) / total;
        report.max_hyperplane_fraction = report.max_hyperplane_fraction.max(thin);
        if thin > 1e-9 {
            report.heavy_hyperplanes += 1;
        }
        for _ in 0..SLABS_PER_DIRECTION {
            let width = w * (1e-3 + 0.05 * rng.gen::<f64>());
            let s0 = t0 + (w - width) * rng.gen::<f64>();
            if mu.mass_below(&v, s0 + width) - mu.mass_below(&v, s0) <= 0.0 {
                report.empty_slabs += 1;
            }
        }
    }
    report
}

/// No-jump probe for `v ↦ g(v)`: under perturbations of size `step`, the
/// quantile must move by less than `10 · diameter · |v − v'| + tol`.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub perturbations: usize,
    pub jumps: usize,
    /// Largest observed `|g(v) − g(v')| / |v − v'|`.
    pub max_ratio: f64,
}

pub fn continuity_probe<M: Measure + ?Sized>(
    mu: &M,
    alpha: f64,
    perturbations: usize,
    step: f64,
    seed: u64,
    tol: f64,
) -> Result<ContinuityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = mu.ambient_dim();
    let limit = 10.0 * mu.diameter();
    let mut report = ContinuityReport {
        perturbations,
        jumps: 0,
        max_ratio: 0.0,
    };
    for _ in 0..perturbations {
        let v = unit_vector(&mut rng, dim);
        let dir = unit_vector(&mut rng, dim);
        let Some(v2) = v.axpy(step, &dir).normalized() else {
            continue;
        };
        let dv = v.distance(&v2);
        let g1 = mu.quantile(&v, alpha, tol)?;
        let g2 = mu.quantile(&v2, alpha, tol)?;
        let dg = (g1 - g2).abs();
        report.max_ratio = report.max_ratio.max(dg / dv);
        if dg >= limit * dv + tol {
            report.jumps += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square(lo: f64, hi: f64) -> Body {
        Body::from_points(&[
            Point::new(&[lo, lo]),
            Point::new(&[hi, lo]),
            Point::new(&[hi, hi]),
            Point::new(&[lo, hi]),
        ])
        .unwrap()
    }

    fn ngon(n: usize, r: f64) -> Body {
        let pts: Vec<Point> = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                Point::new(&[r * a.cos(), r * a.sin()])
            })
            .collect();
        Body::from_points(&pts).unwrap()
    }

    #[test]
    fn uniform_mass_and_quantile() {
        let mu = MeasureSpec::uniform(square(0.0, 1.0));
        let e1 = Point::new(&[1.0, 0.0]);
        assert!((mass_below(&mu, &e1, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!((quantile(&mu, &e1, 0.3, 1e-15).unwrap() - 0.3).abs() < 1e-14);
        let diag = Point::new(&[1.0, 1.0]).normalized().unwrap();
        let t = quantile(&mu, &diag, 0.5, 1e-15).unwrap();
        assert!((t - 2f64.sqrt() / 2.0).abs() < 1e-13);
        assert!((slab_mass(&mu, &e1, 0.2, 0.5).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(slab_mass(&mu, &e1, 0.4, 0.4).unwrap(), 0.0);
        let s = support_interval_of(&mu, &Point::new(&[0.0, 1.0])).unwrap();
        assert_eq!((s.t0, s.t1), (0.0, 1.0));
        assert!(matches!(
            mass_below(&mu, &Point::new(&[1.0, 0.0, 0.0]), 0.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn quantile_endpoints_are_exact() {
        let mu = MeasureSpec::uniform(ngon(7, 1.3));
        let v = Point::new(&[0.6, 0.8]);
        let s = mu.support_interval(&v);
        assert_eq!(quantile(&mu, &v, 0.0, 1e-12).unwrap(), s.t0);
        assert_eq!(quantile(&mu, &v, 1.0, 1e-12).unwrap(), s.t1);
        assert!(matches!(quantile(&mu, &v, 1.5, 1e-12), Err(Error::InvalidFraction(_))));
    }

    #[test]
    fn lifted_ball_masses() {
        let mu = MeasureSpec::lifted(ngon(64, 1.0)).unwrap();
        let up = Point::new(&[0.0, 0.0, 1.0]);
        assert!((mu.mass_below(&up, 4.0) - mu.total_mass()).abs() < 1e-12);
        let mu = MeasureSpec::lifted(square(0.0, 1.0)).unwrap();
        assert!((mu.mass_below(&up, 0.25) - PI / 16.0).abs() < 1e-14);
        // the complement side: w_last < 0 keeps the outside of the disk
        let down = Point::new(&[0.0, 0.0, -1.0]);
        assert!((mu.mass_below(&down, -0.25) - (1.0 - PI / 16.0)).abs() < 1e-14);
    }

    #[test]
    fn lifted_support_interval_of_centered_square() {
        let mu = MeasureSpec::lifted(square(-1.0, 1.0)).unwrap();
        let s = mu.support_interval(&Point::new(&[0.0, 0.0, 1.0]));
        // oracle: |x|² over the square is minimised at 0 and maximised at corners
        assert!(s.t0.abs() < 1e-15);
        assert!((s.t1 - 2.0).abs() < 1e-15);
        let v = Point::new(&[0.3, -0.4, 0.5]).normalized().unwrap();
        let s = mu.support_interval(&v);
        assert_eq!(mu.mass_below(&v, s.t0 - 1.0), 0.0);
        assert_eq!(mu.mass_below(&v, s.t1 + 1.0), mu.total_mass());
        // grid oracle for the minimum of the quadratic over the square
        let mut grid_min = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let x = Point::new(&[-1.0 + i as f64 / 200.0, -1.0 + j as f64 / 200.0]);
                grid_min = grid_min.min(v.dot(&lift_point(&x)));
            }
        }
        assert!(s.t0 <= grid_min + 1e-12 && grid_min - s.t0 < 1e-4);
    }

    #[test]
    fn lifted_interval_base_matches_direct_roots() {
        let base = Body::from_points(&[Point::new(&[-1.0]), Point::new(&[2.0])]).unwrap();
        let mu = MeasureSpec::lifted(base).unwrap();
        // {x : x² <= 1} ∩ [-1, 2] = [-1, 1]
        assert!((mu.mass_below(&Point::new(&[0.0, 1.0]), 1.0) - 2.0).abs() < 1e-15);
        // {x : -x² <= -1} keeps [1, 2]
        assert!((mu.mass_below(&Point::new(&[0.0, -1.0]), -1.0) - 1.0).abs() < 1e-15);
        // {x : x <= 0.5}
        assert!((mu.mass_below(&Point::new(&[1.0, 0.0]), 0.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn lifted_cloud_mass_in_three_dimensions() {
        let cube = Body::from_points(
            &(0..8)
                .map(|m| Point::new(&[(m & 1) as f64, ((m >> 1) & 1) as f64, ((m >> 2) & 1) as f64]))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let l = LiftedBody::with_cloud(cube, 200_000, 3).unwrap();
        let mu = MeasureSpec::LiftedVolume(l);
        // ball of radius 1 about the origin covers an eighth of the unit ball
        let m = mu.mass_below(&Point::new(&[0.0, 0.0, 0.0, 1.0]), 1.0);
        let bound = mu.mass_error_bound();
        assert!((m - PI / 6.0).abs() <= bound, "{m} vs {}", PI / 6.0);
        assert!(matches!(
            mu.quantile(&Point::new(&[0.0, 0.0, 0.0, 1.0]), 0.5, 1e-9),
            Err(Error::ToleranceUnreachable { .. })
        ));
        let t = mu.quantile(&Point::new(&[0.0, 0.0, 0.0, 1.0]), 0.5, 1e-2).unwrap();
        assert!((mu.mass_below(&Point::new(&[0.0, 0.0, 0.0, 1.0]), t) - 0.5).abs() < 1e-2);
    }

    #[test]
    fn lifted_selection_point_lies_on_the_hyperplane() {
        let mu = MeasureSpec::lifted(square(0.0, 1.0)).unwrap();
        let v = Point::new(&[0.2, -0.3, 0.9]).normalized().unwrap();
        let t = mu.quantile(&v, 0.4, 1e-15).unwrap();
        let s = mu.selection_point(&v, t, SelectionRule::Centroid, 0).unwrap();
        assert!((v.dot(&s) - t).abs() < 1e-12);
        assert!(mu.support_contains(&s, 1e-12));
        // oracle: direct arc-length quadrature of the lifted circle
        let (u, r) = {
            let l = match &mu {
                MeasureSpec::LiftedVolume(l) => l,
                _ => unreachable!(),
            };
            let (u, r2) = l.ball(&v, t).unwrap();
            (u, r2.sqrt())
        };
        let n = 200_000;
        let (mut acc, mut count) = (Point::zeros(3), 0usize);
        for k in 0..n {
            let a = 2.0 * PI * (k as f64 + 0.5) / n as f64;
            let x = Point::new(&[u[0] + r * a.cos(), u[1] + r * a.sin()]);
            if (0.0..=1.0).contains(&x[0]) && (0.0..=1.0).contains(&x[1]) {
                acc = &acc + &lift_point(&x);
                count += 1;
            }
        }
        let oracle = acc.scaled(1.0 / count as f64);
        assert!(s.distance(&oracle) < 1e-4, "{s:?} vs {oracle:?}");
    }

    #[test]
    fn uniform_and_lifted_measures_are_nice() {
        let mu = MeasureSpec::uniform(ngon(9, 2.0));
        assert!(niceness_probe(&mu, 20, 1).is_nice());
        let mu = MeasureSpec::lifted(ngon(9, 2.0)).unwrap();
        let r = niceness_probe(&mu, 20, 1);
        assert!(r.is_nice(), "{r:?}");
    }

    // Uniform mass on [0,1] ∪ [2,3]: no mass on the gap between them.
    struct Gapped;

    impl Measure for Gapped {
        fn ambient_dim(&self) -> usize {
            1
        }
        fn total_mass(&self) -> f64 {
            2.0
        }
        fn support_interval(&self, v: &Point) -> SupportInterval {
            if v[0] > 0.0 {
                SupportInterval { t0: 0.0, t1: 3.0 }
            } else {
                SupportInterval { t0: -3.0, t1: 0.0 }
            }
        }
        fn mass_below(&self, v: &Point, t: f64) -> f64 {
            let x = t * v[0];
            let m = x.clamp(0.0, 1.0) + (x.clamp(2.0, 3.0) - 2.0);
            if v[0] > 0.0 {
                m
            } else {
                2.0 - m
            }
        }
        fn diameter(&self) -> f64 {
            3.0
        }
    }

    #[test]
    fn gapped_measure_fails_slab_condition() {
        let r = niceness_probe(&Gapped, 50, 4);
        assert!(r.empty_slabs > 0);
        assert_eq!(r.unbounded_support, 0);
        assert!(!r.is_nice());
    }

    #[test]
    fn continuity_probe_on_polygon() {
        let mu = MeasureSpec::uniform(ngon(11, 1.0));
        let r = continuity_probe(&mu, 0.37, 200, 1e-4, 5, 1e-14).unwrap();
        assert_eq!(r.jumps, 0);
        assert!(r.max_ratio < 2.0);
    }
}
