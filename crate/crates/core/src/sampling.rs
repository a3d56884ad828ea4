//! Seeded sampling helpers: Gaussian variates, uniform directions and
//! Halton low-discrepancy sequences.

use rand::Rng;

use crate::point::Point;

/// Standard normal variate by the Box-Muller transform.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniformly distributed unit vector in R^dim.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Point {
    loop {
        let g = Point::from((0..dim).map(|_| standard_normal(rng)).collect::<Vec<_>>());
        if let Some(u) = g.normalized() {
            return u;
        }
    }
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Point `index` of the Halton sequence in [0,1)^dim, shifted modulo 1 by
/// `shift` (a Cranley-Patterson rotation, which is where the seed enters).
pub fn halton(index: u64, dim: usize, shift: &[f64]) -> Point {
    Point::from(
        (0..dim)
            .map(|k| (radical_inverse(index + 1, PRIMES[k]) + shift[k]).fract())
            .collect::<Vec<_>>(),
    )
}
