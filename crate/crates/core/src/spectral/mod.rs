//! Dense Hermitian linear algebra: eigendecomposition, spectral measures,
//! Schatten–von Neumann norms and seeded random operator generators.

mod hermitian;
mod measure;
mod random;
mod schatten;

pub use hermitian::{eigendecompose, Eigen, HermitianMatrix, MatrixDoc};
pub use measure::{spectral_measure, SpectralMeasure, DEFAULT_CLUSTER_TOL};
pub use random::{
    prescribed_perturbation, random_hermitian, random_hermitian_avoiding, random_unitary, respaced,
    rng_from_seed, split_seed, Ensemble, PerturbedPair, Rng,
};
pub use schatten::{schatten_norm, singular_values, SchattenIndex};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest modulus among the entries of `m`, zero for an empty matrix.
pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}
