//! Transversal halfspaces and spheres that slice prescribed fractions from
//! well-separated convex polytopes.

pub mod cli;
pub mod error;
pub mod generate;
pub mod geometry;
pub mod halfspace;
pub mod io;
pub mod lp;
pub mod measures;
pub mod oracle;
pub mod point;
pub mod sampling;
pub mod separation;
pub mod sphere;
pub mod svg;
pub mod tol;

pub use error::{Error, Result};
pub use geometry::{Body, Halfspace, Section};
pub use point::Point;
