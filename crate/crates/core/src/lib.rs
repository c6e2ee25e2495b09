//! Finite-dimensional calculus of functions `f(A, B)` of pairs of noncommuting
//! self-adjoint matrices.
//!
//! The crate realizes double and triple operator integrals over spectral
//! measures of Hermitian matrices, the `f♯` weighting that defines `f(A, B)`
//! for operators with large spectra, Littlewood–Paley decompositions with
//! interval-valued Besov norms, and experiment drivers that check
//! operator-difference identities exactly and Schatten-class Lipschitz
//! ratios empirically.

pub mod besov;
pub mod error;
pub mod function;
pub mod integrals;
pub mod interval;
pub mod lab;
pub mod spectral;

pub use besov::{besov_norm, lp_blocks, BesovFlavor, BesovReport};
pub use error::{Error, Result};
pub use function::{f_sharp, CatalogSpec, DividedDifference, FourierMode, FunctionR2};
pub use integrals::{
    double_operator_integral, f_of_pair, f_of_pair_sharp, schur_multiplier_bounds, triple_oi_first,
    triple_oi_second, OperatorIntegralResult, TripleIntegrand,
};
pub use interval::Interval;
pub use lab::{
    difference_first_identity_check, difference_second_identity_check,
    full_difference_identity_check, lipschitz_experiment, p_above_2_scan, ExperimentConfig,
    ExperimentReport, IdentityCheckReport, LipschitzTrial,
};
pub use spectral::{
    eigendecompose, schatten_norm, spectral_measure, CMatrix, Ensemble, HermitianMatrix,
    SchattenIndex, SpectralMeasure, C64,
};
