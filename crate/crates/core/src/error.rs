use thiserror::Error;

use crate::halfspace::SolveReport;
use crate::separation::WellSeparationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate body: {0}")]
    DegenerateBody(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("points do not span a hyperplane")]
    DegenerateFlat,
    #[error("halfspace normal is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error("family is not well separated (margin {:.3e})", .0.margin)]
    NotWellSeparated(Box<WellSeparationReport>),
    #[error("no convergence after {} iterations (residual {:.3e})", .best.iterations, .best.residual)]
    NoConvergence { best: Box<SolveReport> },
    #[error("mass error bound {bound:.3e} exceeds tolerance {tol:.3e}")]
    ToleranceUnreachable { bound: f64, tol: f64 },
    #[error("empty section at a fixed-point step")]
    EmptySection,
    #[error("hyperplane does not meet the paraboloid")]
    NoIntersection,
    #[error("lifted solution hyperplane is vertical")]
    VerticalSolution,
    #[error("instance generation failed after {0} rejections")]
    GenerationFailed(usize),
    #[error("{0}")]
    Schema(#[from] crate::io::SchemaError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
