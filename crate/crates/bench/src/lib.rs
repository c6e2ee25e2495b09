//! Fixtures shared by the benchmarks.

use opint_core::spectral::{random_hermitian, Ensemble};
use opint_core::{CatalogSpec, FunctionR2, HermitianMatrix};

/// Seeded GUE pair `(A, B)` of the given dimension.
pub fn pair(dim: usize, seed: u64) -> (HermitianMatrix, HermitianMatrix) {
    let ens = Ensemble::Gue;
    (
        random_hermitian(dim, &ens, 1e-4 * ens.range(), seed).expect("valid ensemble"),
        random_hermitian(dim, &ens, 1e-4 * ens.range(), seed ^ 0x5eed).expect("valid ensemble"),
    )
}

/// Three-mode catalog function with support radius 4.
pub fn function() -> FunctionR2 {
    "sum(mode:4,0,0.5,0, mode:-1,2,0,1, mode:2.4,-3.2,0.3,-0.2)"
        .parse::<CatalogSpec>()
        .and_then(|s| s.build())
        .expect("valid catalog expression")
}
