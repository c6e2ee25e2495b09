use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CheckKind, ExperimentConfig};
use crate::error::Result;
use crate::function::{DividedDifference, FunctionR2};
use crate::integrals::{f_of_measures, triple_oi_first, triple_oi_second};
use crate::spectral::{
    eigendecompose, frobenius, prescribed_perturbation, random_hermitian, random_unitary, respaced,
    rng_from_seed, split_seed, CMatrix, Eigen, Ensemble, HermitianMatrix, SchattenIndex,
    SpectralMeasure, DEFAULT_CLUSTER_TOL,
};

/// A Hermitian matrix together with its spectral measure.
#[derive(Clone, Debug)]
pub struct Operator {
    pub matrix: HermitianMatrix,
    pub measure: SpectralMeasure,
}

impl Operator {
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let measure = SpectralMeasure::of(&matrix)?;
        Ok(Self { matrix, measure })
    }

    /// Operator with a prescribed spectrum: the measure uses `values` exactly.
    pub fn from_spectrum(values: &[f64], basis: &CMatrix) -> Self {
        let matrix = HermitianMatrix::from_spectrum(values, basis);
        let measure = SpectralMeasure::from_eigen(
            Eigen {
                values: values.to_vec(),
                vectors: basis.clone(),
            },
            DEFAULT_CLUSTER_TOL,
        );
        Self { matrix, measure }
    }
}

/// Outcome of one identity check; all norms are Frobenius norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheckReport {
    pub check: CheckKind,
    pub function: String,
    pub dim: usize,
    pub seed: Option<u64>,
    pub lhs_norm: f64,
    pub rhs_norm: f64,
    pub residual_norm: f64,
    pub relative_residual: f64,
}

const TINY: f64 = 1e-300;

fn report(check: CheckKind, f: &FunctionR2, lhs: &CMatrix, rhs: &CMatrix) -> IdentityCheckReport {
    let residual_norm = frobenius(&(lhs - rhs));
    let lhs_norm = frobenius(lhs);
    IdentityCheckReport {
        check,
        function: f.label().to_string(),
        dim: lhs.nrows(),
        seed: None,
        lhs_norm,
        rhs_norm: frobenius(rhs),
        residual_norm,
        relative_residual: residual_norm / lhs_norm.max(TINY),
    }
}

/// `f(A₁,B) − f(A₂,B)` against `∭ ∂[1]f dE_{A₁} (A₁ − A₂) dE_{A₂} dE_B`.
pub fn difference_first_identity_check(
    f: &FunctionR2,
    a1: &HermitianMatrix,
    a2: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<IdentityCheckReport> {
    first_check(
        f,
        &Operator::new(a1.clone())?,
        &Operator::new(a2.clone())?,
        &Operator::new(b.clone())?,
    )
}

pub fn first_check(
    f: &FunctionR2,
    a1: &Operator,
    a2: &Operator,
    b: &Operator,
) -> Result<IdentityCheckReport> {
    let lhs =
        f_of_measures(f, &a1.measure, &b.measure)? - f_of_measures(f, &a2.measure, &b.measure)?;
    let t = a1.matrix.sub(&a2.matrix);
    let rhs = triple_oi_first(
        &DividedDifference::first(f),
        &a1.measure,
        &t,
        &a2.measure,
        &b.measure,
    )?
    .value;
    Ok(report(CheckKind::First, f, &lhs, &rhs))
}

/// `f(A,B₁) − f(A,B₂)` against `∭ ∂[2]f dE_A dE_{B₁} (B₁ − B₂) dE_{B₂}`.
pub fn difference_second_identity_check(
    f: &FunctionR2,
    a: &HermitianMatrix,
    b1: &HermitianMatrix,
    b2: &HermitianMatrix,
) -> Result<IdentityCheckReport> {
    second_check(
        f,
        &Operator::new(a.clone())?,
        &Operator::new(b1.clone())?,
        &Operator::new(b2.clone())?,
    )
}

pub fn second_check(
    f: &FunctionR2,
    a: &Operator,
    b1: &Operator,
    b2: &Operator,
) -> Result<IdentityCheckReport> {
    let lhs =
        f_of_measures(f, &a.measure, &b1.measure)? - f_of_measures(f, &a.measure, &b2.measure)?;
    let t = b1.matrix.sub(&b2.matrix);
    let rhs = triple_oi_second(
        &DividedDifference::second(f),
        &a.measure,
        &b1.measure,
        &t,
        &b2.measure,
    )?
    .value;
    Ok(report(CheckKind::Second, f, &lhs, &rhs))
}

/// `f(A₁,B₁) − f(A₂,B₂)` against the two-term sum
/// `∭ ∂[1]f dE_{A₁}(A₁−A₂)dE_{A₂}dE_{B₁} + ∭ ∂[2]f dE_{A₂}dE_{B₁}(B₁−B₂)dE_{B₂}`.
pub fn full_difference_identity_check(
    f: &FunctionR2,
    a1: &HermitianMatrix,
    a2: &HermitianMatrix,
    b1: &HermitianMatrix,
    b2: &HermitianMatrix,
) -> Result<IdentityCheckReport> {
    let ops = [a1, a2, b1, b2].map(|m| Operator::new(m.clone()));
    let [a1, a2, b1, b2] = ops;
    full_check(f, &a1?, &a2?, &b1?, &b2?)
}

pub fn full_check(
    f: &FunctionR2,
    a1: &Operator,
    a2: &Operator,
    b1: &Operator,
    b2: &Operator,
) -> Result<IdentityCheckReport> {
    let lhs =
        f_of_measures(f, &a1.measure, &b1.measure)? - f_of_measures(f, &a2.measure, &b2.measure)?;
    let ta = a1.matrix.sub(&a2.matrix);
    let tb = b1.matrix.sub(&b2.matrix);
    let first = triple_oi_first(
        &DividedDifference::first(f),
        &a1.measure,
        &ta,
        &a2.measure,
        &b1.measure,
    )?
    .value;
    let second = triple_oi_second(
        &DividedDifference::second(f),
        &a2.measure,
        &b1.measure,
        &tb,
        &b2.measure,
    )?
    .value;
    Ok(report(CheckKind::Full, f, &lhs, &(first + second)))
}

/// Four operators for an identity check.
#[derive(Clone, Debug)]
pub struct IdentityInstance {
    pub a1: Operator,
    pub a2: Operator,
    pub b1: Operator,
    pub b2: Operator,
}

/// `H + D` with `‖D‖₂` of order `0.1 · range/4 · √dim`, respaced so its
/// spectrum keeps distance `gap` from the spectrum of `H`.
fn disjoint_perturbation(
    h: &HermitianMatrix,
    ensemble: &Ensemble,
    gap: f64,
    seed: u64,
) -> Result<HermitianMatrix> {
    let h_values = eigendecompose(h)?.values;
    let target = 0.1 * ensemble.range() / 4.0 * (h.dim() as f64).sqrt();
    let pair = prescribed_perturbation(h, SchattenIndex::HILBERT_SCHMIDT, target, seed)?;
    respaced(&pair.perturbed, gap, &h_values)
}

/// Spectrum for the collision stress mode: `dim` values spaced by `4·gap`
/// around a random centre, and a partner that matches it exactly on even
/// indices and is shifted by `gap` on odd ones.
fn colliding_spectra(dim: usize, ensemble: &Ensemble, gap: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    use rand::Rng;
    let mut rng = rng_from_seed(seed);
    let spacing = (4.0 * gap).max(ensemble.range() / (2.0 * dim as f64));
    let start = -0.5 * spacing * dim as f64 + rng.random::<f64>() * spacing;
    let base: Vec<f64> = (0..dim).map(|i| start + i as f64 * spacing).collect();
    let shift = spacing / 4.0;
    let partner = base
        .iter()
        .enumerate()
        .map(|(i, &x)| if i % 2 == 0 { x } else { x + shift })
        .collect();
    (base, partner)
}

/// Seeded random operators for the identity checks.
///
/// Default: `A₂`, `B₂` are perturbations of `A₁`, `B₁` whose spectra stay
/// `min_gap` away from the unperturbed spectra. With `collide`, half of the
/// spectral points coincide exactly so the derivative branch is exercised.
pub fn identity_instance(
    dim: usize,
    ensemble: &Ensemble,
    min_gap: f64,
    seed: u64,
    collide: bool,
) -> Result<IdentityInstance> {
    let s = |i| split_seed(seed, i);
    if collide {
        let mut rng = rng_from_seed(s(10));
        let (va, va2) = colliding_spectra(dim, ensemble, min_gap, s(11));
        let (vb, vb2) = colliding_spectra(dim, ensemble, min_gap, s(12));
        let bases: Vec<CMatrix> = (0..4).map(|_| random_unitary(dim, &mut rng)).collect();
        return Ok(IdentityInstance {
            a1: Operator::from_spectrum(&va, &bases[0]),
            a2: Operator::from_spectrum(&va2, &bases[1]),
            b1: Operator::from_spectrum(&vb, &bases[2]),
            b2: Operator::from_spectrum(&vb2, &bases[3]),
        });
    }
    let a1 = random_hermitian(dim, ensemble, min_gap, s(0))?;
    let a2 = disjoint_perturbation(&a1, ensemble, min_gap, s(1))?;
    let b1 = random_hermitian(dim, ensemble, min_gap, s(2))?;
    let b2 = disjoint_perturbation(&b1, ensemble, min_gap, s(3))?;
    Ok(IdentityInstance {
        a1: Operator::new(a1)?,
        a2: Operator::new(a2)?,
        b1: Operator::new(b1)?,
        b2: Operator::new(b2)?,
    })
}

/// All identity checks of an identity-mode run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub checks: Vec<IdentityCheckReport>,
    pub max_relative_residual: f64,
}

/// Runs `trials` instances per dimension; instance `t` uses function `t mod #functions`.
pub fn identity_experiment(config: &ExperimentConfig) -> Result<IdentityReport> {
    config.validate()?;
    let ensemble = config.ensemble.ensemble()?;
    let gap = config.ensemble.min_gap()?;
    let functions: Vec<FunctionR2> = config
        .function_specs()?
        .iter()
        .map(|s| s.build())
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..config.dims.len())
        .flat_map(|d| (0..config.trials).map(move |t| (d, t)))
        .collect();

    let per_job: Vec<Vec<IdentityCheckReport>> = jobs
        .par_iter()
        .map(|&(d, t)| {
            let dim = config.dims[d];
            let seed = split_seed(config.seed, (d * config.trials + t) as u64);
            let f = &functions[t % functions.len()];
            let inst = identity_instance(dim, &ensemble, gap, seed, config.collide)?;
            let mut out = Vec::with_capacity(config.checks.len());
            for check in &config.checks {
                let mut r = match check {
                    CheckKind::First => first_check(f, &inst.a1, &inst.a2, &inst.b1)?,
                    CheckKind::Second => second_check(f, &inst.a1, &inst.b1, &inst.b2)?,
                    CheckKind::Full => full_check(f, &inst.a1, &inst.a2, &inst.b1, &inst.b2)?,
                };
                r.seed = Some(seed);
                out.push(r);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let checks: Vec<IdentityCheckReport> = per_job.into_iter().flatten().collect();
    let max_relative_residual = checks
        .iter()
        .map(|c| c.relative_residual)
        .fold(0.0, f64::max);
    Ok(IdentityReport {
        seed: config.seed,
        config: config.clone(),
        checks,
        max_relative_residual,
    })
}
