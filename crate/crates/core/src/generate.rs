//! Seeded instance generators for tests and the `gen` command.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::io::{Instance, InstanceOptions, Mode, NamedBody, Partition};
use crate::point::Point;
use crate::separation::{check_well_separated, Family};
use crate::tol;

pub const MAX_REJECTIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    SeparatedBoxes,
    RandomTriangles,
    RadialSquares,
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind> {
        match s {
            "separated_boxes" | "boxes" => Ok(Kind::SeparatedBoxes),
            "random_triangles" | "triangles" => Ok(Kind::RandomTriangles),
            "radial_squares" | "radial" => Ok(Kind::RadialSquares),
            other => Err(Error::InvalidInput(format!("unknown instance kind {other:?}"))),
        }
    }
}

/// A deterministic well-separated instance. `mode` fixes the body count
/// (`d + 1` for spheres) and whether fractions or a partition are emitted.
pub fn generate_instance(d: usize, kind: Kind, mode: Mode, seed: u64) -> Result<Instance> {
    if !(1..=4).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = if mode == Mode::Sphere { d + 1 } else { d };
    let bodies = match kind {
        Kind::SeparatedBoxes => separated_boxes(d, n, &mut rng),
        Kind::RandomTriangles => random_simplices(d, n, &mut rng)?,
        Kind::RadialSquares => {
            if d != 2 || mode != Mode::Sphere {
                return Err(Error::InvalidInput("radial_squares is a planar sphere instance".into()));
            }
            radial_squares()
        }
    };
    let (alpha, partition) = match mode {
        Mode::TheoremC => (
            None,
            Some(Partition {
                inside: vec![1],
                outside: (2..=n).collect(),
            }),
        ),
        _ if kind == Kind::RadialSquares => (Some(vec![0.5; n]), None),
        _ => (Some((0..n).map(|_| rng.gen_range(0.02..0.98)).collect()), None),
    };
    Ok(Instance {
        dimension: d,
        mode,
        bodies: bodies
            .into_iter()
            .enumerate()
            .map(|(i, vertices)| NamedBody {
                name: format!("K{}", i + 1),
                vertices,
            })
            .collect(),
        alpha,
        partition,
        options: InstanceOptions::default(),
    })
}

// Box k sits near 6 e_k (the origin first in sphere mode). Any two disjoint
// groups of the points {0, 6 e_k} are at least 6/√d apart along the normal
// of their separating plane, while half-widths below 0.5 and jitter below
// 0.1 move each box by at most 0.6 √d along any unit direction.
fn separated_boxes(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Vec<f64>>> {
    let offset = n - d;
    (0..n)
        .map(|k| {
            let center: Vec<f64> = (0..d)
                .map(|j| {
                    let base = if k >= offset && k - offset == j { 6.0 } else { 0.0 };
                    base + rng.gen_range(-0.1..0.1)
                })
                .collect();
            let half: Vec<f64> = (0..d).map(|_| rng.gen_range(0.3..0.5)).collect();
            (0..1usize << d)
                .map(|mask| {
                    (0..d)
                        .map(|j| center[j] + if mask >> j & 1 == 1 { half[j] } else { -half[j] })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn random_simplices(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Vec<f64>>>> {
    for _ in 0..MAX_REJECTIONS {
        let candidate: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|_| {
                let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
                (0..=d)
                    .map(|_| center.iter().map(|c| c + rng.gen_range(-2.0..2.0)).collect())
                    .collect()
            })
            .collect();
        if accept(&candidate) {
            return Ok(candidate);
        }
    }
    Err(Error::GenerationFailed(MAX_REJECTIONS))
}

// Rejects thin simplices as well as families that fail the separation check.
fn accept(candidate: &[Vec<Vec<f64>>]) -> bool {
    let bodies: Result<Vec<Body>> = candidate
        .iter()
        .map(|vs| Body::from_points(&vs.iter().map(|v| Point::new(v)).collect::<Vec<_>>()))
        .collect();
    let Ok(bodies) = bodies else {
        return false;
    };
    let d = bodies[0].dim();
    if bodies.iter().any(|b| b.volume() < 0.05 * 4f64.powi(d as i32) / factorial(d)) {
        return false;
    }
    match Family::new(bodies) {
        Ok(f) => check_well_separated(&f, tol::MARGIN).ok,
        Err(_) => false,
    }
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

// Unit squares centred at distance 3 from the origin at 90°, 210° and 330°,
// each with a side facing the origin.
fn radial_squares() -> Vec<Vec<Vec<f64>>> {
    let h = 3f64.sqrt() / 2.0;
    let dirs = [[0.0, 1.0], [-h, -0.5], [h, -0.5]];
    dirs.iter()
        .map(|r| {
            let t = [-r[1], r[0]];
            let c = [3.0 * r[0], 3.0 * r[1]];
            [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]
                .iter()
                .map(|&(a, b)| vec![c[0] + a * r[0] + b * t[0], c[1] + a * r[1] + b * t[1]])
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::serialize_instance;

    #[test]
    fn boxes_are_separated() {
        for d in 1..=4 {
            for mode in [Mode::Halfspace, Mode::Sphere] {
                for seed in 0..5 {
                    let inst = generate_instance(d, Kind::SeparatedBoxes, mode, seed).unwrap();
                    let family = inst.family().unwrap();
                    assert!(check_well_separated(&family, tol::MARGIN).ok, "d={d} {mode:?} seed={seed}");
                }
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_instance(2, Kind::RandomTriangles, Mode::Halfspace, 7).unwrap();
        let b = generate_instance(2, Kind::RandomTriangles, Mode::Halfspace, 7).unwrap();
        let c = generate_instance(2, Kind::RandomTriangles, Mode::Halfspace, 8).unwrap();
        assert_eq!(serialize_instance(&a), serialize_instance(&b));
        assert_ne!(serialize_instance(&a), serialize_instance(&c));
    }

    #[test]
    fn radial_squares_face_the_origin() {
        let inst = generate_instance(2, Kind::RadialSquares, Mode::Sphere, 99).unwrap();
        for b in inst.family().unwrap().bodies() {
            let c = b.centroid();
            assert!((c.norm() - 3.0).abs() < 1e-14);
            // nearest point to the origin is the inner face midpoint
            assert!((b.nearest_point(&Point::zeros(2)).norm() - 2.5).abs() < 1e-12);
            assert!((b.volume() - 1.0).abs() < 1e-14);
        }
        assert_eq!(inst, generate_instance(2, Kind::RadialSquares, Mode::Sphere, 1).unwrap());
    }
}
