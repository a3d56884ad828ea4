//! The positive transversal halfspace: given `d` measures on well-separated
//! supports in `R^d` and fractions `α`, find the unique `H(v <= t)` with
//! `μ_i(H) = α_i μ_i(R^d)` whose section selection points are positively
//! oriented with respect to `v`.
//!
//! Two engines are available. The fixed-point map `x ↦ h(v(x))` moves a
//! tuple of points, one per support, to the selection points of the
//! quantile sections along the tuple's oriented normal. Newton's method
//! instead solves `g_i(v) = g_d(v)` on a tangent chart of the sphere, where
//! `g_i(v)` is the `α_i`-quantile of `μ_i` along `v`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Halfspace;
use crate::measures::{Measure, MeasureSpec, SelectionRule};
use crate::point::{tangent_basis, Point};
use crate::separation::{
    check_point_sets, check_well_separated, orientation_det, orientation_normal, Family,
    WellSeparationReport,
};
use crate::tol;

/// Prescribed fractions, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FractionVector(Vec<f64>);

impl FractionVector {
    pub fn new(alpha: Vec<f64>) -> Result<FractionVector> {
        if let Some(&a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidFraction(a));
        }
        Ok(FractionVector(alpha))
    }

    pub fn uniform(n: usize, alpha: f64) -> Result<FractionVector> {
        FractionVector::new(vec![alpha; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_boundary(&self) -> bool {
        self.0.iter().any(|&a| a == 0.0 || a == 1.0)
    }

    pub fn complement(&self) -> FractionVector {
        FractionVector(self.0.iter().map(|a| 1.0 - a).collect())
    }

    // Boundary entries pulled to 1/n or 1 - 1/n.
    fn relaxed(&self, n: u32) -> FractionVector {
        let e = 1.0 / n as f64;
        FractionVector(
            self.0
                .iter()
                .map(|&a| match a {
                    0.0 => e,
                    1.0 => 1.0 - e,
                    a => a,
                })
                .collect(),
        )
    }
}

impl TryFrom<Vec<f64>> for FractionVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<FractionVector> {
        FractionVector::new(v)
    }
}

impl From<FractionVector> for Vec<f64> {
    fn from(f: FractionVector) -> Vec<f64> {
        f.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    PaperMap,
    NewtonOnSphere,
    #[default]
    Hybrid,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Engine> {
        match s {
            "paper_map" | "paper-map" => Ok(Engine::PaperMap),
            "newton" | "newton_on_sphere" | "newton-on-sphere" => Ok(Engine::NewtonOnSphere),
            "hybrid" => Ok(Engine::Hybrid),
            other => Err(Error::InvalidInput(format!("unknown engine {other:?}"))),
        }
    }
}

/// Where the first attempt starts.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Start {
    /// The tuple of support centroids.
    #[default]
    Centroids,
    Tuple(Vec<Point>),
    Normal(Point),
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub engine: Engine,
    /// Step weight of the fixed-point iteration, halved whenever the
    /// residual grows.
    pub damping: f64,
    pub max_iterations: usize,
    pub residual_tol: f64,
    /// Stages `n` of the boundary continuation `α ← 1/n` or `1 − 1/n`.
    pub continuation_schedule: Vec<u32>,
    /// Number of seeded random starts tried after the configured one.
    pub multistart_count: usize,
    pub seed: u64,
    pub selection: SelectionRule,
    pub start: Start,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            engine: Engine::Hybrid,
            damping: 0.5,
            max_iterations: 500,
            residual_tol: 1e-9,
            continuation_schedule: (1..=10).map(|k| 1u32 << k).collect(),
            multistart_count: 8,
            seed: 42,
            selection: SelectionRule::Centroid,
            start: Start::Centroids,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub halfspace: Halfspace,
    pub per_body_fraction: Vec<f64>,
    pub t_values: Vec<f64>,
    pub selection_points: Vec<Point>,
    pub orientation_det: f64,
    pub iterations: usize,
    /// Largest fraction error `max_i |achieved_i − α_i|`.
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub engine_used: Engine,
    /// Normals of negatively oriented roots that were discarded.
    pub rejected_normals: Vec<Point>,
    pub converged: bool,
}

impl SolveReport {
    pub fn normal(&self) -> &Point {
        self.halfspace.normal()
    }

    pub fn offset(&self) -> f64 {
        self.halfspace.offset()
    }
}

/// One point per support.
#[derive(Clone, Debug, PartialEq)]
pub struct TupleState(Vec<Point>);

impl TupleState {
    pub fn new(points: Vec<Point>) -> TupleState {
        TupleState(points)
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    /// Largest distance by which a member leaves its support, measured as
    /// facet violation.
    pub fn max_violation(&self, problem: &TransversalProblem) -> f64 {
        self.0
            .iter()
            .zip(&problem.measures)
            .map(|(x, m)| match m {
                MeasureSpec::UniformOnBody(b) => b.max_violation(x).max(0.0),
                MeasureSpec::LiftedVolume(l) => {
                    let base = x.truncated();
                    let below = base.norm_sq() - x[x.dim() - 1];
                    l.base().max_violation(&base).max(below).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Measures with certified well-separated supports.
#[derive(Clone, Debug)]
pub struct TransversalProblem {
    measures: Vec<MeasureSpec>,
    separation: WellSeparationReport,
    scale: f64,
}

impl TransversalProblem {
    /// Uniform measures on the bodies of `family`.
    pub fn uniform(family: &Family) -> Result<TransversalProblem> {
        let measures = family.bodies().iter().cloned().map(MeasureSpec::uniform).collect();
        TransversalProblem::new(family, measures)
    }

    /// Measures supported on the bodies of `family`, in family order.
    pub fn new(family: &Family, measures: Vec<MeasureSpec>) -> Result<TransversalProblem> {
        if measures.len() != family.len() {
            return Err(Error::InvalidInput(format!(
                "{} measures for {} bodies",
                measures.len(),
                family.len()
            )));
        }
        let separation = match family.certificate() {
            Some(r) => r.clone(),
            None => check_well_separated(family, tol::MARGIN),
        };
        TransversalProblem::with_report(measures, separation)
    }

    /// Separation is checked on the measures' support point sets.
    pub fn from_measures(measures: Vec<MeasureSpec>) -> Result<TransversalProblem> {
        let dim = measures
            .first()
            .ok_or_else(|| Error::InvalidInput("no measures".into()))?
            .ambient_dim();
        let sets: Vec<Vec<Point>> = measures.iter().map(|m| m.support_points()).collect();
        let refs: Vec<&[Point]> = sets.iter().map(|s| s.as_slice()).collect();
        let separation = check_point_sets(dim, &refs, tol::MARGIN);
        TransversalProblem::with_report(measures, separation)
    }

    fn with_report(measures: Vec<MeasureSpec>, separation: WellSeparationReport) -> Result<TransversalProblem> {
        let dim = measures[0].ambient_dim();
        if let Some(m) = measures.iter().find(|m| m.ambient_dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.ambient_dim(),
            });
        }
        if !separation.ok {
            return Err(Error::NotWellSeparated(Box::new(separation)));
        }
        let scale = measures.iter().map(|m| m.diameter()).fold(0.0, f64::max);
        let reach = measures
            .iter()
            .flat_map(|m| m.support_points())
            .map(|p| p.norm())
            .fold(0.0, f64::max);
        Ok(TransversalProblem {
            measures,
            separation,
            scale: scale.max(reach),
        })
    }

    pub fn dim(&self) -> usize {
        self.measures[0].ambient_dim()
    }

    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    pub fn measures(&self) -> &[MeasureSpec] {
        &self.measures
    }

    pub fn separation(&self) -> &WellSeparationReport {
        &self.separation
    }

    /// Length scale of the supports and their distance from the origin.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn quantile_tol(&self, i: usize) -> f64 {
        let m = &self.measures[i];
        (m.mass_error_bound() / m.total_mass()).max(1e-15)
    }

    /// Fraction tolerance actually enforced: the requested one, widened to
    /// ten times the quadrature bound for sampled measures.
    pub fn effective_tol(&self, requested: f64) -> f64 {
        let bound = self
            .measures
            .iter()
            .map(|m| m.mass_error_bound() / m.total_mass())
            .fold(0.0, f64::max);
        requested.max(10.0 * bound)
    }

    /// `(g_1(v), …, g_n(v))`.
    pub fn quantiles(&self, alpha: &FractionVector, v: &Point) -> Result<Vec<f64>> {
        self.measures
            .iter()
            .zip(alpha.as_slice())
            .enumerate()
            .map(|(i, (m, &a))| m.quantile(v, a, self.quantile_tol(i)))
            .collect()
    }

    /// Achieved fractions of `H(v <= t)`.
    pub fn fractions(&self, v: &Point, t: f64) -> Vec<f64> {
        self.measures
            .iter()
            .map(|m| m.mass_below(v, t) / m.total_mass())
            .collect()
    }
}

/// `h(v)`: quantile offsets along `v` and the selection point of each
/// section `supp μ_i ∩ {<v,·> = g_i(v)}`.
pub fn selection_points(
    problem: &TransversalProblem,
    alpha: &FractionVector,
    v: &Point,
    rule: SelectionRule,
    seed: u64,
) -> Result<(Vec<Point>, Vec<f64>)> {
    let t = problem.quantiles(alpha, v)?;
    let mut points = Vec::with_capacity(t.len());
    for (m, &ti) in problem.measures.iter().zip(&t) {
        points.push(m.selection_point(v, ti, rule, seed).ok_or(Error::EmptySection)?);
    }
    Ok((points, t))
}

/// One application of `f = h ∘ v`.
pub fn paper_map_step(
    problem: &TransversalProblem,
    alpha: &FractionVector,
    x: &TupleState,
    rule: SelectionRule,
    seed: u64,
) -> Result<TupleState> {
    let v = orientation_normal(&x.0)?;
    let (s, _) = selection_points(problem, alpha, &v, rule, seed)?;
    Ok(TupleState(s))
}

/// The positive transversal halfspace for `alpha`.
pub fn solve(problem: &TransversalProblem, alpha: &FractionVector, opts: &SolveOptions) -> Result<SolveReport> {
    check_shape(problem, alpha)?;
    if opts.residual_tol <= 0.0 {
        return Err(Error::InvalidInput("residual_tol must be positive".into()));
    }
    if problem.dim() == 1 {
        return solve_line(problem, alpha, opts);
    }
    Solver::new(problem, opts).run(alpha)
}

fn check_shape(problem: &TransversalProblem, alpha: &FractionVector) -> Result<()> {
    if problem.len() != problem.dim() {
        return Err(Error::InvalidInput(format!(
            "{} measures in dimension {}; exactly {} are needed",
            problem.len(),
            problem.dim(),
            problem.dim()
        )));
    }
    if alpha.len() != problem.len() {
        return Err(Error::DimensionMismatch {
            expected: problem.len(),
            found: alpha.len(),
        });
    }
    Ok(())
}

// On the line the orientation determinant is v itself, so v = +1.
fn solve_line(problem: &TransversalProblem, alpha: &FractionVector, opts: &SolveOptions) -> Result<SolveReport> {
    let v = Point::new(&[1.0]);
    let (points, t) = selection_points(problem, alpha, &v, opts.selection, opts.seed)?;
    let report = Solver::new(problem, opts).report(alpha, &v, t, points, 0, vec![], Engine::NewtonOnSphere);
    finish(report, problem.effective_tol(opts.residual_tol))
}

fn finish(mut report: SolveReport, tol: f64) -> Result<SolveReport> {
    report.converged = report.residual <= tol && report.orientation_det > 0.0;
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NoConvergence {
            best: Box::new(report),
        })
    }
}

struct Solver<'a> {
    problem: &'a TransversalProblem,
    opts: &'a SolveOptions,
    tol: f64,
    rejected: Vec<Point>,
}

// Outcome of one engine run from one start.
struct Attempt {
    v: Point,
    iterations: usize,
    history: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a TransversalProblem, opts: &'a SolveOptions) -> Solver<'a> {
        Solver {
            problem,
            opts,
            tol: problem.effective_tol(opts.residual_tol),
            rejected: Vec::new(),
        }
    }

    fn run(mut self, alpha: &FractionVector) -> Result<SolveReport> {
        let mut stages: Vec<FractionVector> = Vec::new();
        if alpha.has_boundary() {
            stages.extend(self.opts.continuation_schedule.iter().map(|&n| alpha.relaxed(n.max(2))));
        }
        stages.push(alpha.clone());

        let mut start = self.opts.start.clone();
        let mut iterations = 0;
        let mut history = Vec::new();
        let last = stages.len() - 1;
        for (k, stage) in stages.iter().enumerate() {
            match self.solve_stage(stage, &start) {
                Ok(mut report) => {
                    iterations += report.iterations;
                    history.append(&mut report.residual_history);
                    if k == last {
                        report.iterations = iterations;
                        report.residual_history = history;
                        return Ok(report);
                    }
                    start = Start::Normal(report.halfspace.normal().clone());
                }
                // an intermediate stage may fail; the next one still gets a start
                Err(Error::NoConvergence { best }) if k < last => {
                    iterations += best.iterations;
                    start = Start::Normal(best.halfspace.normal().clone());
                }
                Err(e) => return Err(e),
            }
        }
        unreachable!()
    }

    // The configured start, reflections of rejected roots, then seeded
    // random tuples, until one attempt succeeds.
    fn solve_stage(&mut self, alpha: &FractionVector, start: &Start) -> Result<SolveReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let mut pending: Vec<Start> = vec![start.clone()];
        let mut random_left = self.opts.multistart_count;
        let mut best: Option<SolveReport> = None;
        let mut total_iterations = 0;
        let mut reflected = 0;
        loop {
            let next = if let Some(s) = pending.pop() {
                s
            } else if random_left > 0 {
                random_left -= 1;
                Start::Tuple(self.problem.measures.iter().map(|m| m.random_point(&mut rng)).collect())
            } else {
                break;
            };
            let Some(attempt) = self.attempt(alpha, &next) else {
                continue;
            };
            total_iterations += attempt.iterations;
            let Ok((points, t)) =
                selection_points(self.problem, alpha, &attempt.v, self.opts.selection, self.opts.seed)
            else {
                continue;
            };
            let report = self.report(alpha, &attempt.v, t, points, total_iterations, attempt.history, self.opts.engine);
            if report.orientation_det <= 0.0 {
                self.rejected.push(attempt.v.clone());
                if reflected < 4 {
                    reflected += 1;
                    pending.push(Start::Normal(attempt.v.scaled(-1.0)));
                }
                continue;
            }
            if report.residual <= self.tol {
                let mut report = report;
                report.converged = true;
                report.rejected_normals = self.rejected.clone();
                return Ok(report);
            }
            if best.as_ref().is_none_or(|b| report.residual < b.residual) {
                best = Some(report);
            }
        }
        let mut best = match best {
            Some(b) => b,
            None => {
                let v = self.initial_normal(start).unwrap_or_else(|| Point::basis(self.problem.dim(), 0));
                let t = self.problem.quantiles(alpha, &v)?;
                let (points, _) = selection_points(self.problem, alpha, &v, self.opts.selection, self.opts.seed)?;
                self.report(alpha, &v, t, points, total_iterations, vec![], self.opts.engine)
            }
        };
        best.iterations = total_iterations;
        best.rejected_normals = self.rejected.clone();
        Err(Error::NoConvergence { best: Box::new(best) })
    }

    fn initial_normal(&self, start: &Start) -> Option<Point> {
        match start {
            Start::Normal(v) => v.normalized(),
            Start::Tuple(x) => orientation_normal(x).ok(),
            Start::Centroids => {
                let c: Vec<Point> = self.problem.measures.iter().map(|m| m.center()).collect();
                orientation_normal(&c).ok()
            }
        }
    }

    fn initial_tuple(&self, alpha: &FractionVector, start: &Start) -> Option<TupleState> {
        match start {
            Start::Tuple(x) => Some(TupleState(x.clone())),
            Start::Centroids => Some(TupleState(self.problem.measures.iter().map(|m| m.center()).collect())),
            Start::Normal(v) => selection_points(self.problem, alpha, v, self.opts.selection, self.opts.seed)
                .ok()
                .map(|(s, _)| TupleState(s)),
        }
    }

    fn attempt(&self, alpha: &FractionVector, start: &Start) -> Option<Attempt> {
        match self.opts.engine {
            Engine::NewtonOnSphere => self.newton(alpha, self.initial_normal(start)?, self.opts.max_iterations),
            Engine::PaperMap => {
                let x = self.initial_tuple(alpha, start)?;
                self.paper_map(alpha, x, self.opts.max_iterations, 0.0).map(|(a, _)| a)
            }
            Engine::Hybrid => {
                let (v, iterations, mut history) = match self.initial_tuple(alpha, start) {
                    Some(x) => match self.paper_map(alpha, x, self.opts.max_iterations.min(100), 1e-3) {
                        Some((a, _)) => (a.v, a.iterations, a.history),
                        None => (self.initial_normal(start)?, 0, vec![]),
                    },
                    None => (self.initial_normal(start)?, 0, vec![]),
                };
                let mut n = self.newton(alpha, v, self.opts.max_iterations)?;
                history.append(&mut n.history);
                Some(Attempt {
                    v: n.v,
                    iterations: iterations + n.iterations,
                    history,
                })
            }
        }
    }

    // Damped iteration x ← (1 − λ) x + λ f(x), stopped once the residual
    // (spread of the quantiles plus the change of normal) is below `stop`.
    fn paper_map(&self, alpha: &FractionVector, mut x: TupleState, max_iterations: usize, stop: f64) -> Option<(Attempt, TupleState)> {
        let floor = 1e-13 * (1.0 + self.problem.scale);
        let stop = stop.max(floor);
        let mut lambda = self.opts.damping.clamp(1e-6, 1.0);
        let mut v_prev = orientation_normal(&x.0).ok()?;
        let mut history = Vec::new();
        let mut last_residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < max_iterations {
            iterations += 1;
            let v = orientation_normal(&x.0).ok()?;
            let (s, t) = selection_points(self.problem, alpha, &v, self.opts.selection, self.opts.seed).ok()?;
            let spread = t.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - t.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            let residual = spread + v.distance(&v_prev);
            history.push(residual);
            if residual > last_residual {
                lambda = (lambda * 0.5).max(1.0 / 64.0);
            }
            last_residual = residual;
            v_prev = v.clone();
            if residual <= stop && iterations > 1 {
                return Some((Attempt { v, iterations, history }, x));
            }
            let next: Vec<Point> = x
                .0
                .iter()
                .zip(&s)
                .zip(&self.problem.measures)
                .map(|((xi, si), m)| m.project(&xi.lerp(si, lambda)))
                .collect();
            x = TupleState(next);
        }
        let v = orientation_normal(&x.0).ok()?;
        Some((Attempt { v, iterations, history }, x))
    }

    // F(v) = (g_1 − g_n, …, g_{n−1} − g_n).
    fn residual_vector(&self, alpha: &FractionVector, v: &Point) -> Option<Vec<f64>> {
        let g = self.problem.quantiles(alpha, v).ok()?;
        let last = *g.last()?;
        Some(g[..g.len() - 1].iter().map(|gi| gi - last).collect())
    }

    fn newton(&self, alpha: &FractionVector, v0: Point, max_iterations: usize) -> Option<Attempt> {
        const FD_STEP: f64 = 1e-6;
        const MAX_STEP: f64 = 0.5;
        let ftol = 1e-12 * (1.0 + self.problem.scale);
        let m = self.problem.dim() - 1;
        let sup = |f: &[f64]| f.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut v = v0;
        let mut f = self.residual_vector(alpha, &v)?;
        let mut history = vec![sup(&f)];
        let mut iterations = 0;
        while iterations < max_iterations && sup(&f) > ftol {
            iterations += 1;
            let basis = tangent_basis(&v);
            let chart = |z: &[f64]| {
                let mut p = v.clone();
                for (e, zk) in basis.iter().zip(z) {
                    p = p.axpy(*zk, e);
                }
                p.normalized()
            };
            let mut jac = DMatrix::<f64>::zeros(m, m);
            for k in 0..m {
                let mut z = vec![0.0; m];
                z[k] = FD_STEP;
                let fk = self.residual_vector(alpha, &chart(&z)?)?;
                for r in 0..m {
                    jac[(r, k)] = (fk[r] - f[r]) / FD_STEP;
                }
            }
            let rhs = DVector::from_iterator(m, f.iter().map(|x| -x));
            let step = jac
                .clone()
                .lu()
                .solve(&rhs)
                .filter(|s| s.iter().all(|x| x.is_finite()))
                .or_else(|| jac.svd(true, true).solve(&rhs, 1e-14).ok())?;
            let mut step: Vec<f64> = step.iter().copied().collect();
            let len = step.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len > MAX_STEP {
                step.iter_mut().for_each(|x| *x *= MAX_STEP / len);
            }
            // backtrack until the residual decreases
            let current = sup(&f);
            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let z: Vec<f64> = step.iter().map(|x| x * scale).collect();
                if let Some(vn) = chart(&z) {
                    if let Some(fnew) = self.residual_vector(alpha, &vn) {
                        if sup(&fnew) < current {
                            accepted = Some((vn, fnew));
                            break;
                        }
                    }
                }
                scale *= 0.5;
            }
            let Some((vn, fnew)) = accepted else {
                break;
            };
            v = vn;
            f = fnew;
            history.push(sup(&f));
        }
        Some(Attempt { v, iterations, history })
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        alpha: &FractionVector,
        v: &Point,
        t: Vec<f64>,
        points: Vec<Point>,
        iterations: usize,
        history: Vec<f64>,
        engine: Engine,
    ) -> SolveReport {
        let offset = t.iter().sum::<f64>() / t.len() as f64;
        let per_body_fraction = self.problem.fractions(v, offset);
        let residual = per_body_fraction
            .iter()
            .zip(alpha.as_slice())
            .map(|(f, a)| (f - a).abs())
            .fold(0.0, f64::max);
        let det = orientation_det(v, &points);
        SolveReport {
            halfspace: Halfspace::new(v.clone(), offset).expect("unit normal"),
            per_body_fraction,
            t_values: t,
            selection_points: points,
            orientation_det: det,
            iterations,
            residual,
            residual_history: history,
            engine_used: engine,
            rejected_normals: self.rejected.clone(),
            converged: false,
        }
    }
}

/// The two tangent halfspaces for a partition `(I, J)`: the first holds the
/// `I` bodies (fractions 1) and excludes the `J` bodies (fractions 0), the
/// second the reverse.
#[derive(Clone, Debug, Serialize)]
pub struct TangentPair {
    pub inside_first: SolveReport,
    pub inside_second: SolveReport,
}

/// `inside` lists zero-based indices of `I`; every other body is in `J`.
pub fn solve_theorem_c(problem: &TransversalProblem, inside: &[usize], opts: &SolveOptions) -> Result<TangentPair> {
    let n = problem.len();
    if let Some(&i) = inside.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidInput(format!("body index {i} out of range")));
    }
    if inside.is_empty() || inside.len() == n {
        return Err(Error::InvalidInput("both sides of the partition must be nonempty".into()));
    }
    let alpha = FractionVector::new((0..n).map(|k| if inside.contains(&k) { 1.0 } else { 0.0 }).collect())?;
    let first = solve(problem, &alpha, opts)?;
    let second = solve(problem, &alpha.complement(), opts)?;
    Ok(TangentPair {
        inside_first: first,
        inside_second: second,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Cluster {
    pub normal: Point,
    pub offset: f64,
    pub members: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub starts: usize,
    pub successes: usize,
    pub clusters: Vec<Cluster>,
    /// Largest distance `|v − v_0| + |t − t_0|` from the first success.
    pub max_spread: f64,
    pub rejected_roots: usize,
}

impl UniquenessReport {
    pub fn is_unique(&self) -> bool {
        self.clusters.len() == 1
    }
}

/// Solves from `starts` seeded random tuples and clusters the results at
/// distance `1e-7` in normal and offset.
pub fn uniqueness_probe(
    problem: &TransversalProblem,
    alpha: &FractionVector,
    opts: &SolveOptions,
    starts: usize,
    seed: u64,
) -> UniquenessReport {
    const RADIUS: f64 = 1e-7;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = UniquenessReport {
        starts,
        successes: 0,
        clusters: Vec::new(),
        max_spread: 0.0,
        rejected_roots: 0,
    };
    let mut first: Option<(Point, f64)> = None;
    for k in 0..starts {
        let tuple: Vec<Point> = problem.measures.iter().map(|m| m.random_point(&mut rng)).collect();
        let o = SolveOptions {
            start: Start::Tuple(tuple),
            seed: seed.wrapping_add(k as u64),
            ..opts.clone()
        };
        let Ok(r) = solve(problem, alpha, &o) else {
            continue;
        };
        report.successes += 1;
        report.rejected_roots += r.rejected_normals.len();
        let (v, t) = (r.normal().clone(), r.offset());
        let (v0, t0) = first.get_or_insert_with(|| (v.clone(), t)).clone();
        report.max_spread = report.max_spread.max(v.distance(&v0).max((t - t0).abs()));
        match report
            .clusters
            .iter_mut()
            .find(|c| c.normal.distance(&v) <= RADIUS && (c.offset - t).abs() <= RADIUS)
        {
            Some(c) => c.members += 1,
            None => report.clusters.push(Cluster {
                normal: v,
                offset: t,
                members: 1,
            }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Body;

    fn square(x0: f64, y0: f64) -> Body {
        Body::from_points(&[
            Point::new(&[x0, y0]),
            Point::new(&[x0 + 1.0, y0]),
            Point::new(&[x0 + 1.0, y0 + 1.0]),
            Point::new(&[x0, y0 + 1.0]),
        ])
        .unwrap()
    }

    fn two_squares() -> TransversalProblem {
        let f = Family::new(vec![square(0.0, 0.0), square(3.0, 0.0)]).unwrap();
        TransversalProblem::uniform(&f).unwrap()
    }

    #[test]
    fn fraction_vector_range() {
        assert!(FractionVector::new(vec![0.2, 1.5]).is_err());
        let a = FractionVector::new(vec![0.0, 1.0]).unwrap();
        assert!(a.has_boundary());
        assert_eq!(a.relaxed(4).as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn halving_two_squares() {
        let p = two_squares();
        let r = solve(&p, &FractionVector::uniform(2, 0.5).unwrap(), &SolveOptions::default()).unwrap();
        assert!(r.normal().distance(&Point::new(&[0.0, 1.0])) < 1e-9, "{:?}", r.normal());
        assert!((r.offset() - 0.5).abs() < 1e-9);
        assert!(r.orientation_det > 0.0);
    }

    #[test]
    fn selection_points_of_the_halving_line() {
        let p = two_squares();
        let (s, t) = selection_points(
            &p,
            &FractionVector::uniform(2, 0.5).unwrap(),
            &Point::new(&[0.0, 1.0]),
            SelectionRule::Centroid,
            0,
        )
        .unwrap();
        assert_eq!(t, vec![0.5, 0.5]);
        assert!(s[0].distance(&Point::new(&[0.5, 0.5])) < 1e-15);
        assert!(s[1].distance(&Point::new(&[3.5, 0.5])) < 1e-15);
    }

    #[test]
    fn fixed_point_of_the_map() {
        let p = two_squares();
        let x = TupleState::new(vec![Point::new(&[0.5, 0.5]), Point::new(&[3.5, 0.5])]);
        let y = paper_map_step(&p, &FractionVector::uniform(2, 0.5).unwrap(), &x, SelectionRule::Centroid, 0).unwrap();
        for (a, b) in x.points().iter().zip(y.points()) {
            assert!(a.distance(b) < 1e-12);
        }
    }

    #[test]
    fn boundary_fractions_give_the_tangent_line() {
        let p = two_squares();
        let r = solve(&p, &FractionVector::new(vec![0.0, 1.0]).unwrap(), &SolveOptions::default()).unwrap();
        let v = Point::new(&[-1.0, 2.0]).scaled(1.0 / 5f64.sqrt());
        assert!(r.normal().distance(&v) < 1e-7, "{:?}", r.normal());
        assert!((r.offset() + 1.0 / 5f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn line_quantile() {
        let k = Body::from_points(&[Point::new(&[2.0]), Point::new(&[5.0])]).unwrap();
        let p = TransversalProblem::uniform(&Family::new(vec![k]).unwrap()).unwrap();
        let r = solve(&p, &FractionVector::new(vec![0.4]).unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(r.normal().coords(), &[1.0]);
        assert!((r.offset() - 3.2).abs() < 1e-12);
    }

    #[test]
    fn engines_agree_on_an_asymmetric_instance() {
        let tri = |pts: &[[f64; 2]]| Body::from_points(&pts.iter().map(|p| Point::new(p)).collect::<Vec<_>>()).unwrap();
        let f = Family::new(vec![
            tri(&[[0.0, 0.0], [1.5, 0.2], [0.3, 1.1]]),
            tri(&[[4.0, -1.0], [5.0, 0.5], [4.2, 1.7]]),
        ])
        .unwrap();
        let p = TransversalProblem::uniform(&f).unwrap();
        let alpha = FractionVector::new(vec![0.3, 0.8]).unwrap();
        let mut reports = Vec::new();
        for engine in [Engine::PaperMap, Engine::NewtonOnSphere, Engine::Hybrid] {
            let o = SolveOptions {
                engine,
                max_iterations: 5000,
                ..SolveOptions::default()
            };
            reports.push(solve(&p, &alpha, &o).unwrap());
        }
        for r in &reports[1..] {
            assert!(r.normal().distance(reports[0].normal()) < 1e-7);
            assert!((r.offset() - reports[0].offset()).abs() < 1e-7);
        }
    }
}
