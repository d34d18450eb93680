//! Deterministic sampling utilities shared by test suites and CLI drivers.
//!
//! All randomness in the crate flows through a seeded ChaCha stream; suites
//! split the stream by index so samples are reproducible per sample, not
//! just per run.

use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exactnum::GaussianRational;
use crate::poly::{Ambient, Expt, MultiPoly, UniPoly};

/// The crate-wide deterministic generator.
pub type Prng = ChaCha8Rng;

/// A generator for suite `stream` under the master `seed`.
pub fn rng_for(seed: u64, stream: u64) -> Prng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A rational with numerator in `[-height, height]` and denominator in
/// `[1, height]`.
pub fn rational(rng: &mut Prng, height: i64) -> BigRational {
    let h = height.max(1);
    BigRational::new(rng.random_range(-h..=h).into(), rng.random_range(1..=h).into())
}

/// A small-height Gaussian rational.
pub fn gaussian(rng: &mut Prng, height: i64) -> GaussianRational {
    GaussianRational::new(rational(rng, height), rational(rng, height))
}

/// A nonzero small-height Gaussian rational.
pub fn gaussian_nonzero(rng: &mut Prng, height: i64) -> GaussianRational {
    loop {
        let g = gaussian(rng, height);
        if !g.is_zero() {
            return g;
        }
    }
}

/// A point with small-height Gaussian-rational coordinates.
pub fn point(rng: &mut Prng, dim: usize, height: i64) -> Vec<GaussianRational> {
    (0..dim).map(|_| gaussian(rng, height)).collect()
}

/// A univariate polynomial of degree at most `max_degree`.
pub fn unipoly(rng: &mut Prng, max_degree: usize, height: i64) -> UniPoly {
    let deg = rng.random_range(0..=max_degree);
    UniPoly::from_coeffs((0..=deg).map(|_| gaussian(rng, height)).collect())
}

/// A multivariate polynomial with bounded per-term degree and term count.
pub fn multipoly(
    rng: &mut Prng,
    ambient: &Ambient,
    max_degree: u32,
    max_terms: usize,
    height: i64,
) -> MultiPoly {
    let nterms = rng.random_range(0..=max_terms);
    let mut p = MultiPoly::zero(ambient);
    for _ in 0..nterms {
        let mut exp = vec![0u32; ambient.len()];
        let mut budget = max_degree;
        for e in exp.iter_mut() {
            let step = rng.random_range(0..=budget);
            *e = step;
            budget -= step;
        }
        let term = MultiPoly::monomial(ambient, Expt(exp), gaussian(rng, height)).unwrap();
        p = p.try_add(&term).unwrap();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| rng_for(42, 1).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| rng_for(42, 1).random()).collect();
        assert_eq!(a, b);
        let c: u64 = rng_for(42, 2).random();
        assert_ne!(a[0], c);
    }

    #[test]
    fn rational_heights_are_bounded() {
        let mut rng = rng_for(7, 0);
        for _ in 0..100 {
            let q = rational(&mut rng, 5);
            assert!(q.numer().magnitude() <= &5u32.into());
            assert!(q.denom().magnitude() <= &5u32.into());
        }
    }
}
