//! Command-line front end. Exit codes: 0 success, 2 not well separated,
//! 3 no convergence, 4 invalid input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::generate::{generate_instance, Kind};
use crate::halfspace::{solve, solve_theorem_c, Engine, SolveOptions, SolveReport, TransversalProblem};
use crate::io::{
    halfspace_doc, parse_instance, parse_result, serialize_instance, serialize_result, Instance, Mode, ResultDoc,
    SphereDoc, Status, unsigned_zeros,
};
use crate::oracle::oracle_angle_sweep;
use crate::separation::{check_well_separated, Family};
use crate::sphere::{build_lifted_instance, solve_lifted};
use crate::svg::render_svg;
use crate::tol;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_SEPARATED: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "transversal", version, about = "Transversal halfspaces and spheres for well-separated polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve an instance file and print the result document.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check well-separation and report the margin or a witness.
    Check {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Angle-sweep oracle for planar halfspace instances.
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded instance: separated_boxes, random_triangles or radial_squares.
    Gen {
        kind: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// halfspace, sphere or theorem_c
        #[arg(long, default_value = "halfspace")]
        mode: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a planar instance and result as SVG.
    Plot {
        file: PathBuf,
        result: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags override the instance's `options`, which override the defaults.
#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    engine: Option<Engine>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    multistart: Option<usize>,
}

impl SolverArgs {
    fn options(&self, inst: &Instance) -> Result<SolveOptions, Failure> {
        let mut o = inst.options.to_solve_options();
        if let Some(t) = self.tol {
            if t.is_nan() || t <= 0.0 {
                return Err(Failure::invalid(format!("--tol must be positive, got {t}")));
            }
            o.residual_tol = t;
        }
        if let Some(m) = self.max_iter {
            o.max_iterations = m;
        }
        if let Some(e) = self.engine {
            o.engine = e;
        }
        if let Some(s) = self.seed {
            o.seed = s;
        }
        if let Some(m) = self.multistart {
            o.multistart_count = m;
        }
        Ok(o)
    }
}

impl clap::ValueEnum for Engine {
    fn value_variants<'a>() -> &'a [Self] {
        &[Engine::PaperMap, Engine::NewtonOnSphere, Engine::Hybrid]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Engine::PaperMap => "paper_map",
            Engine::NewtonOnSphere => "newton",
            Engine::Hybrid => "hybrid",
        }))
    }
}

struct Failure {
    code: i32,
    message: String,
    /// A document still worth emitting, such as a witness or best iterate.
    doc: Option<Box<ResultDoc>>,
}

impl Failure {
    fn invalid(message: String) -> Failure {
        Failure {
            code: EXIT_INVALID,
            message,
            doc: None,
        }
    }

    fn from_error(e: Error) -> Failure {
        let code = match &e {
            Error::NotWellSeparated(_) => EXIT_NOT_SEPARATED,
            Error::NoConvergence { .. }
            | Error::ToleranceUnreachable { .. }
            | Error::EmptySection
            | Error::DegenerateFlat
            | Error::NoIntersection
            | Error::VerticalSolution => EXIT_NO_CONVERGENCE,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
            doc: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::from_error(e)
    }
}

/// Runs one command; diagnostics go to `stderr`, documents to `stdout` or
/// the `--out` file.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let (out, outcome) = match cli.command {
        Command::Solve { file, solver, out } => (out, cmd_solve(&file, &solver)),
        Command::Check { file, out } => (out, cmd_check(&file)),
        Command::Oracle { file, grid, out } => (out, cmd_oracle(&file, grid)),
        Command::Gen {
            kind,
            dim,
            seed,
            mode,
            out,
        } => (out, cmd_gen(&kind, dim, seed, &mode)),
        Command::Plot { file, result, out } => (out, cmd_plot(&file, &result)),
    };
    let (code, text) = match outcome {
        Ok(text) => (EXIT_OK, Some(text)),
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            (f.code, f.doc.as_deref().map(serialize_result))
        }
    };
    if let Some(text) = text {
        let written = match &out {
            Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
            None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
        };
        if let Err(msg) = written {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_INVALID;
        }
    }
    code
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = read(path)?;
    parse_instance(&text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn not_separated(inst: &Instance, engine: Engine, seed: u64, family: &Family) -> Option<Failure> {
    let report = check_well_separated(family, tol::MARGIN);
    if report.ok {
        return None;
    }
    let mut doc = ResultDoc::empty(Status::NotSeparated, inst.mode, engine, seed);
    doc.set_separation(&report);
    Some(Failure {
        code: EXIT_NOT_SEPARATED,
        message: format!("family is not well separated (margin {:.3e})", report.margin),
        doc: Some(Box::new(doc)),
    })
}

fn cmd_solve(path: &Path, args: &SolverArgs) -> Result<String, Failure> {
    let inst = load(path)?;
    let opts = args.options(&inst)?;
    let family = inst.family()?;
    if let Some(f) = not_separated(&inst, opts.engine, opts.seed, &family) {
        return Err(f);
    }
    let family = family.certify(tol::MARGIN)?;
    let mut doc = ResultDoc::empty(Status::Success, inst.mode, opts.engine, opts.seed);
    match inst.mode {
        Mode::Halfspace => {
            let problem = TransversalProblem::uniform(&family)?;
            doc.set_separation(problem.separation());
            let report = solve(&problem, &inst.fractions()?, &opts).map_err(|e| failed(e, &doc))?;
            doc.set_halfspace(&report);
        }
        Mode::TheoremC => {
            let problem = TransversalProblem::uniform(&family)?;
            doc.set_separation(problem.separation());
            let pair = solve_theorem_c(&problem, &inst.inside(), &opts).map_err(|e| failed(e, &doc))?;
            let both: [&SolveReport; 2] = [&pair.inside_first, &pair.inside_second];
            doc.halfspaces = Some(both.iter().map(|r| halfspace_doc(r, true)).collect());
            doc.residual = Some(both.iter().map(|r| r.residual).fold(0.0, f64::max));
            doc.iterations = both.iter().map(|r| r.iterations).sum();
        }
        Mode::Sphere => {
            let lifted = build_lifted_instance(&family)?;
            doc.set_separation(lifted.base_separation());
            let sol = solve_lifted(&family, &lifted, &inst.fractions()?, &opts).map_err(|e| failed(e, &doc))?;
            doc.sphere = Some(SphereDoc {
                center: unsigned_zeros(sol.sphere.center.coords()),
                radius: sol.sphere.radius,
            });
            let mut t = vec![0.0; family.len()];
            for (k, &base) in lifted.order().iter().enumerate() {
                t[base] = sol.lifted.t_values[k];
            }
            doc.per_body_fractions = sol.ball_fractions.clone();
            doc.t_values = t;
            doc.orientation_det = Some(sol.lifted.orientation_det);
            doc.residual = Some(sol.residual);
            doc.iterations = sol.lifted.iterations;
        }
    }
    Ok(serialize_result(&doc))
}

// A failed solve still reports its best iterate.
fn failed(e: Error, partial: &ResultDoc) -> Failure {
    let mut doc = partial.clone();
    doc.status = Status::NoConvergence;
    if let Error::NoConvergence { best } = &e {
        match doc.mode {
            Mode::Halfspace => doc.set_halfspace(best),
            _ => {
                doc.residual = Some(best.residual);
                doc.iterations = best.iterations;
            }
        }
    }
    let mut f = Failure::from_error(e);
    if f.code == EXIT_NO_CONVERGENCE {
        f.doc = Some(Box::new(doc));
    }
    f
}

fn cmd_check(path: &Path) -> Result<String, Failure> {
    let inst = load(path)?;
    let opts = inst.options.to_solve_options();
    let family = inst.family()?;
    if let Some(f) = not_separated(&inst, opts.engine, opts.seed, &family) {
        return Err(f);
    }
    let mut doc = ResultDoc::empty(Status::Success, inst.mode, opts.engine, opts.seed);
    doc.set_separation(&check_well_separated(&family, tol::MARGIN));
    Ok(serialize_result(&doc))
}

fn cmd_oracle(path: &Path, grid: usize) -> Result<String, Failure> {
    let inst = load(path)?;
    if inst.mode != Mode::Halfspace {
        return Err(Failure::invalid("the oracle handles halfspace instances only".into()));
    }
    let family = inst.family()?;
    if let Some(f) = not_separated(&inst, Engine::default(), 0, &family) {
        return Err(f);
    }
    let sweep = oracle_angle_sweep(&family, &inst.fractions()?, grid)?;
    Ok(serde_json::to_string_pretty(&sweep).expect("sweeps serialize") + "\n")
}

fn cmd_gen(kind: &str, dim: usize, seed: u64, mode: &str) -> Result<String, Failure> {
    let kind: Kind = kind.parse()?;
    let mode: Mode = serde_json::from_value(serde_json::Value::String(mode.to_string()))
        .map_err(|_| Failure::invalid(format!("unknown mode {mode:?}")))?;
    let inst = generate_instance(dim, kind, mode, seed)?;
    Ok(serialize_instance(&inst))
}

fn cmd_plot(path: &Path, result: &Path) -> Result<String, Failure> {
    let inst = load(path)?;
    let text = read(result)?;
    let doc = parse_result(&text).map_err(|e| Failure::invalid(format!("{}: {e}", result.display())))?;
    Ok(render_svg(&inst, &doc)?)
}
