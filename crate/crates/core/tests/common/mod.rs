#![allow(dead_code)]

use opint_core::spectral::{random_hermitian, random_unitary, rng_from_seed, split_seed};
use opint_core::{CMatrix, Ensemble, FourierMode, FunctionR2, HermitianMatrix, C64};
use rand::Rng;

pub fn complex_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut rng = rng_from_seed(seed);
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn unitary(dim: usize, seed: u64) -> CMatrix {
    random_unitary(dim, &mut rng_from_seed(seed))
}

pub fn gue(dim: usize, seed: u64) -> HermitianMatrix {
    random_hermitian(dim, &Ensemble::Gue, 1e-3, seed).unwrap()
}

/// Three-mode trigonometric polynomial whose largest frequency has radius `sigma`.
pub fn catalog(sigma: f64, seed: u64) -> FunctionR2 {
    let mut rng = rng_from_seed(split_seed(seed, 99));
    let mut coeff = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let theta: f64 = 0.7 + seed as f64;
    FunctionR2::trig_poly(vec![
        FourierMode::new(sigma * theta.cos(), sigma * theta.sin(), coeff()),
        FourierMode::new(0.5 * sigma, -0.25 * sigma, coeff()),
        FourierMode::new(-0.3, 0.2, coeff()),
    ])
}

pub fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}
