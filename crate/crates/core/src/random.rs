//! Seeded random inputs: correlation matrices from random frames, phases,
//! permutations and zero-diagonal Hermitian directions. All generators take
//! an explicit RNG so runs are reproducible.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::correlation::{CorrelationMatrix, Frame};
use crate::matkernel::{CMatrix, HermitianMatrix, C64};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Standard complex Gaussian (unit variance).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(gaussian(rng) * s, gaussian(rng) * s)
}

/// Gram matrix of `n` independent uniformly random unit vectors in C^r
/// (or R^r). Rank is `min(n, r)` almost surely.
pub fn correlation<R: Rng + ?Sized>(n: usize, r: usize, real: bool, rng: &mut R) -> CorrelationMatrix {
    let v = CMatrix::from_fn(r, n, |_, _| {
        if real {
            C64::new(gaussian(rng), 0.0)
        } else {
            complex_gaussian(rng)
        }
    });
    let mut frame = Frame::new(v);
    frame.normalize_columns();
    CorrelationMatrix::from_frame(&frame, 0.0)
}

pub fn unit_phases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect()
}

pub fn permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn zero_diagonal_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let z = complex_gaussian(rng);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianMatrix::symmetrized(m)
}

pub fn complex_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}
