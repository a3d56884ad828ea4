//! Geometric tolerances shared by every module.

/// Two points closer than this (relative to body scale) are the same point.
pub const COINCIDENCE: f64 = 1e-12;

/// A point is on a hyperplane when its signed distance is below this
/// (relative to body scale).
pub const ON_PLANE: f64 = 1e-10;

/// Relative tolerance for volume identities.
pub const VOLUME_REL: f64 = 1e-10;

/// Default strict-separation margin threshold.
pub const MARGIN: f64 = 1e-9;

/// Unit-norm tolerance for halfspace normals.
pub const UNIT_NORM: f64 = 1e-12;

/// Absolute tolerance for a quantity of magnitude `scale`.
pub fn scaled(tol: f64, scale: f64) -> f64 {
    tol * scale.max(1.0)
}
