//! Double and triple operator integrals over spectral measures of Hermitian
//! matrices, functions of noncommuting pairs, and Schur-multiplier bounds.
//!
//! Every integral is an exact finite sum over spectral points. Instead of
//! forming projections, the sums are contracted in the eigenbases: with
//! `P_j = Σ_{r∈j} u_r u_r*`, the double integral becomes
//! `U (Φ̃ ∘ U*QW) W*`, where `Φ̃[r, c] = Φ(x_{j(r)}, y_{k(c)})`. The triple
//! integrals reduce the same way to one `dim³` contraction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{f_sharp, DividedDifference, DividedDifferenceKind, FunctionR2};
use crate::spectral::{
    rng_from_seed, schatten_norm, singular_values, CMatrix, HermitianMatrix, SchattenIndex,
    SpectralMeasure, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegralKind {
    Double,
    TripleFirst,
    TripleSecond,
}

/// Value of an operator integral with its provenance.
#[derive(Clone, Debug)]
pub struct OperatorIntegralResult {
    pub value: CMatrix,
    pub kind: IntegralKind,
    pub integrand_id: String,
    /// Number of spectral points of each measure, in slot order.
    pub spectra_sizes: Vec<usize>,
}

/// Values of a three-variable integrand on a product grid, `(j·n₂ + k)·n₃ + l`.
#[derive(Clone, Debug)]
pub struct Grid3 {
    pub dims: [usize; 3],
    pub data: Vec<C64>,
}

impl Grid3 {
    #[inline]
    pub fn at(&self, j: usize, k: usize, l: usize) -> C64 {
        self.data[(j * self.dims[1] + k) * self.dims[2] + l]
    }

    /// The `l`-th slice `[Ψ(u_j, v_k, w_l)]_{j,k}`.
    pub fn slice_last(&self, l: usize) -> CMatrix {
        CMatrix::from_fn(self.dims[0], self.dims[1], |j, k| self.at(j, k, l))
    }
}

/// Integrand `Ψ(u, v, w)` of a triple operator integral.
pub trait TripleIntegrand: Sync {
    fn id(&self) -> String;

    fn eval(&self, u: f64, v: f64, w: f64) -> Result<C64>;

    fn grid(&self, us: &[f64], vs: &[f64], ws: &[f64]) -> Result<Grid3> {
        let mut data = Vec::with_capacity(us.len() * vs.len() * ws.len());
        for &u in us {
            for &v in vs {
                for &w in ws {
                    data.push(self.eval(u, v, w)?);
                }
            }
        }
        Ok(Grid3 {
            dims: [us.len(), vs.len(), ws.len()],
            data,
        })
    }
}

/// Closure-backed integrand.
pub struct FnIntegrand<F> {
    pub id: String,
    pub f: F,
}

impl<F: Fn(f64, f64, f64) -> C64 + Sync> FnIntegrand<F> {
    pub fn new(id: impl Into<String>, f: F) -> Self {
        Self { id: id.into(), f }
    }
}

impl<F: Fn(f64, f64, f64) -> C64 + Sync> TripleIntegrand for FnIntegrand<F> {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn eval(&self, u: f64, v: f64, w: f64) -> Result<C64> {
        Ok((self.f)(u, v, w))
    }
}

impl TripleIntegrand for DividedDifference {
    fn id(&self) -> String {
        match self.kind {
            DividedDifferenceKind::First => format!("dd1[{}]", self.f.label()),
            DividedDifferenceKind::Second => format!("dd2[{}]", self.f.label()),
        }
    }

    fn eval(&self, u: f64, v: f64, w: f64) -> Result<C64> {
        DividedDifference::eval(self, u, v, w)
    }

    /// Caches `f` on the two planes the quotient needs, so each grid value
    /// costs one subtraction and one division. Same arithmetic as the pointwise path.
    fn grid(&self, us: &[f64], vs: &[f64], ws: &[f64]) -> Result<Grid3> {
        let f = &self.f;
        let (n1, n2, n3) = (us.len(), vs.len(), ws.len());
        let mut data = vec![C64::new(0.0, 0.0); n1 * n2 * n3];
        match self.kind {
            DividedDifferenceKind::First => {
                // Ψ(x1, x2, y) = (f(x1,y) − f(x2,y)) / (x1 − x2)
                let left: Vec<C64> = us
                    .iter()
                    .flat_map(|&x| ws.iter().map(move |&y| f.eval(x, y)))
                    .collect();
                let right: Vec<C64> = vs
                    .iter()
                    .flat_map(|&x| ws.iter().map(move |&y| f.eval(x, y)))
                    .collect();
                data.par_chunks_mut(n2 * n3)
                    .enumerate()
                    .try_for_each(|(j, chunk)| {
                        for k in 0..n2 {
                            for l in 0..n3 {
                                chunk[k * n3 + l] = if us[j] == vs[k] {
                                    DividedDifference::eval(self, us[j], vs[k], ws[l])?
                                } else {
                                    (left[j * n3 + l] - right[k * n3 + l]) / (us[j] - vs[k])
                                };
                            }
                        }
                        Ok::<_, Error>(())
                    })?;
            }
            DividedDifferenceKind::Second => {
                // Ψ(x, y1, y2) = (f(x,y1) − f(x,y2)) / (y1 − y2)
                let left: Vec<C64> = us
                    .iter()
                    .flat_map(|&x| vs.iter().map(move |&y| f.eval(x, y)))
                    .collect();
                let right: Vec<C64> = us
                    .iter()
                    .flat_map(|&x| ws.iter().map(move |&y| f.eval(x, y)))
                    .collect();
                data.par_chunks_mut(n2 * n3)
                    .enumerate()
                    .try_for_each(|(j, chunk)| {
                        for k in 0..n2 {
                            for l in 0..n3 {
                                chunk[k * n3 + l] = if vs[k] == ws[l] {
                                    DividedDifference::eval(self, us[j], vs[k], ws[l])?
                                } else {
                                    (left[j * n2 + k] - right[j * n3 + l]) / (vs[k] - ws[l])
                                };
                            }
                        }
                        Ok::<_, Error>(())
                    })?;
            }
        }
        Ok(Grid3 {
            dims: [n1, n2, n3],
            data,
        })
    }
}

fn check_dims(op: &CMatrix, measures: &[&SpectralMeasure]) -> Result<()> {
    let d = measures[0].dim();
    if op.nrows() != d || op.ncols() != d || measures.iter().any(|m| m.dim() != d) {
        return Err(Error::Validation(format!(
            "dimension mismatch: operator is {}x{}, spectral measures have dims {:?}",
            op.nrows(),
            op.ncols(),
            measures.iter().map(|m| m.dim()).collect::<Vec<_>>()
        )));
    }
    Ok(())
}

fn grid2(phi: &FunctionR2, xs: &[f64], ys: &[f64]) -> CMatrix {
    CMatrix::from_fn(xs.len(), ys.len(), |j, k| phi.eval(xs[j], ys[k]))
}

/// `∬ Φ(x, y) dE_A(x) Q dE_B(y) = Σ_{j,k} Φ(x_j, y_k) P_j Q R_k`.
pub fn double_operator_integral(
    phi: &FunctionR2,
    ea: &SpectralMeasure,
    q: &CMatrix,
    eb: &SpectralMeasure,
) -> Result<OperatorIntegralResult> {
    check_dims(q, &[ea, eb])?;
    let weights = grid2(phi, ea.points(), eb.points());
    let value = double_from_grid(&weights, ea, q, eb);
    Ok(OperatorIntegralResult {
        value,
        kind: IntegralKind::Double,
        integrand_id: phi.label().to_string(),
        spectra_sizes: vec![ea.len(), eb.len()],
    })
}

/// Double integral with the integrand given by its values on the spectral grid.
pub fn double_from_grid(
    weights: &CMatrix,
    ea: &SpectralMeasure,
    q: &CMatrix,
    eb: &SpectralMeasure,
) -> CMatrix {
    let (u, w) = (ea.basis(), eb.basis());
    let mut inner = u.adjoint() * q * w;
    let (pa, pb) = (ea.column_points(), eb.column_points());
    for c in 0..inner.ncols() {
        for r in 0..inner.nrows() {
            inner[(r, c)] *= weights[(pa[r], pb[c])];
        }
    }
    u * inner * w.adjoint()
}

/// `f(A, B) = ∬ f(x, y) dE_A(x) dE_B(y)`.
pub fn f_of_pair(f: &FunctionR2, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<CMatrix> {
    f_of_measures(f, &SpectralMeasure::of(a)?, &SpectralMeasure::of(b)?)
}

/// `f(A, B)` from precomputed spectral measures.
pub fn f_of_measures(
    f: &FunctionR2,
    ea: &SpectralMeasure,
    eb: &SpectralMeasure,
) -> Result<CMatrix> {
    if ea.dim() != eb.dim() {
        return Err(Error::Validation(format!(
            "dimension mismatch: {} vs {}",
            ea.dim(),
            eb.dim()
        )));
    }
    let weights = grid2(f, ea.points(), eb.points());
    let c = weights[(0, 0)];
    if weights.iter().all(|&z| z == c) {
        // P_j and R_k each sum to I, so a constant grid integrates to c·I exactly
        return Ok(CMatrix::identity(ea.dim(), ea.dim()).map(|z| z * c));
    }
    let (u, w) = (ea.basis(), eb.basis());
    let mut inner = u.adjoint() * w;
    let (pa, pb) = (ea.column_points(), eb.column_points());
    for c in 0..inner.ncols() {
        for r in 0..inner.nrows() {
            inner[(r, c)] *= weights[(pa[r], pb[c])];
        }
    }
    Ok(u * inner * w.adjoint())
}

/// `f(A, B) = f♯(A, B)(I − iB)` with `f♯(s, t) = f(s, t)/(1 − it)`.
///
/// `I − iB` is applied as `∫ (1 − it) dE_B(t)`, the same spectral measure
/// that integrates `f♯`.
pub fn f_of_pair_sharp(
    f: &FunctionR2,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> Result<CMatrix> {
    f_of_measures_sharp(f, &SpectralMeasure::of(a)?, &SpectralMeasure::of(b)?)
}

pub fn f_of_measures_sharp(
    f: &FunctionR2,
    ea: &SpectralMeasure,
    eb: &SpectralMeasure,
) -> Result<CMatrix> {
    let bounded = f_of_measures(&f_sharp(f), ea, eb)?;
    let weight = eb.apply_fn(|t| C64::new(1.0, -t));
    Ok(bounded * weight)
}

/// `Σ_{j,k,l} Ψ(x_j, x′_k, y_l) P_j T P′_k R_l`: the operator sits between
/// the first two measures and the third measure closes on the right.
pub fn triple_oi_first(
    psi: &dyn TripleIntegrand,
    e1: &SpectralMeasure,
    t: &CMatrix,
    e2: &SpectralMeasure,
    e3: &SpectralMeasure,
) -> Result<OperatorIntegralResult> {
    check_dims(t, &[e1, e2, e3])?;
    let grid = psi.grid(e1.points(), e2.points(), e3.points())?;
    let (u, v, w) = (e1.basis(), e2.basis(), e3.basis());
    let t_tilde = u.adjoint() * t * v;
    let g = v.adjoint() * w;
    let m = contract(
        &grid,
        e1.column_points(),
        e2.column_points(),
        e3.column_points(),
        &t_tilde,
        &g,
    );
    Ok(OperatorIntegralResult {
        value: u * m * w.adjoint(),
        kind: IntegralKind::TripleFirst,
        integrand_id: psi.id(),
        spectra_sizes: vec![e1.len(), e2.len(), e3.len()],
    })
}

/// `Σ_{j,k,l} Ψ(x_j, y_k, y′_l) P_j R_k T R′_l`: the operator sits between
/// the last two measures.
pub fn triple_oi_second(
    psi: &dyn TripleIntegrand,
    e1: &SpectralMeasure,
    e2: &SpectralMeasure,
    t: &CMatrix,
    e3: &SpectralMeasure,
) -> Result<OperatorIntegralResult> {
    check_dims(t, &[e1, e2, e3])?;
    let grid = psi.grid(e1.points(), e2.points(), e3.points())?;
    let (u, v, w) = (e1.basis(), e2.basis(), e3.basis());
    let g = u.adjoint() * v;
    let t_tilde = v.adjoint() * t * w;
    let m = contract(
        &grid,
        e1.column_points(),
        e2.column_points(),
        e3.column_points(),
        &g,
        &t_tilde,
    );
    Ok(OperatorIntegralResult {
        value: u * m * w.adjoint(),
        kind: IntegralKind::TripleSecond,
        integrand_id: psi.id(),
        spectra_sizes: vec![e1.len(), e2.len(), e3.len()],
    })
}

/// `M[r, c] = Σ_s Ψ[p1(r), p2(s), p3(c)] · L[r, s] · R[s, c]`.
///
/// Rows are independent and each row sums in ascending `s`, so the result
/// does not depend on the thread count.
fn contract(
    grid: &Grid3,
    p1: &[usize],
    p2: &[usize],
    p3: &[usize],
    left: &CMatrix,
    right: &CMatrix,
) -> CMatrix {
    let (n_r, n_s, n_c) = (left.nrows(), left.ncols(), right.ncols());
    let rows: Vec<Vec<C64>> = (0..n_r)
        .into_par_iter()
        .map(|r| {
            let mut row = vec![C64::new(0.0, 0.0); n_c];
            for s in 0..n_s {
                let ls = left[(r, s)];
                let base = (p1[r] * grid.dims[1] + p2[s]) * grid.dims[2];
                for (c, out) in row.iter_mut().enumerate() {
                    *out += grid.data[base + p3[c]] * ls * right[(s, c)];
                }
            }
            row
        })
        .collect();
    CMatrix::from_fn(n_r, n_c, |r, c| rows[r][c])
}

/// Bracket for the Schur-multiplier norm of a grid matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurBounds {
    /// Best ratio `‖Φ∘Q‖ / ‖Q‖` over the witness matrices tried.
    pub lower: f64,
    /// Smallest factorization bound `(max_j Σ|φ_n(x_j)|² · max_k Σ|ψ_n(y_k)|²)^{1/2}` found.
    pub upper: f64,
}

/// Schur-multiplier bounds for `Φ` restricted to `xs × ys`.
pub fn schur_multiplier_bounds(
    phi: &FunctionR2,
    xs: &[f64],
    ys: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SchurBounds> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Validation(
            "Schur multiplier bounds need nonempty point sets".into(),
        ));
    }
    schur_bounds_of_grid(&grid2(phi, xs, ys), trials, seed)
}

const RANK_TOL: f64 = 1e-14;

pub fn schur_bounds_of_grid(grid: &CMatrix, trials: usize, seed: u64) -> Result<SchurBounds> {
    if grid.is_empty() {
        return Err(Error::Validation(
            "Schur multiplier bounds need a nonempty grid".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::Validation("trials must be at least 1".into()));
    }
    Ok(SchurBounds {
        lower: schur_lower(grid, trials, seed)?,
        upper: schur_upper(grid)?,
    })
}

fn op_norm(m: &CMatrix) -> Result<f64> {
    schatten_norm(m, SchattenIndex::OPERATOR)
}

fn schur_lower(grid: &CMatrix, trials: usize, seed: u64) -> Result<f64> {
    let (n, m) = grid.shape();
    // unit matrix at the largest entry, then the all-ones matrix
    let mut best = grid.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let ones = CMatrix::from_element(n, m, C64::new(1.0, 0.0));
    best = best.max(op_norm(&grid.component_mul(&ones))? / op_norm(&ones)?);
    let mut rng = rng_from_seed(seed);
    for _ in 0..trials {
        let q = CMatrix::from_fn(n, m, |_, _| {
            use rand::Rng;
            let re: f64 = rng.sample(rand_distr::StandardNormal);
            let im: f64 = rng.sample(rand_distr::StandardNormal);
            C64::new(re, im)
        });
        let qn = op_norm(&q)?;
        if qn > 0.0 {
            best = best.max(op_norm(&grid.component_mul(&q))? / qn);
        }
    }
    Ok(best)
}

fn max_row_norm(m: &CMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max)
        .sqrt()
}

/// Minimum of the bounds from the trivial factorizations `Φ = I·Φ`, `Φ = Φ·I`
/// and the balanced truncated SVD `Φ = (U S^½)(S^½ V*)`.
fn schur_upper(grid: &CMatrix) -> Result<f64> {
    let by_columns = max_row_norm(&grid.transpose());
    let by_rows = max_row_norm(grid);
    let svd = nalgebra::linalg::SVD::try_new(grid.clone(), true, true, f64::EPSILON, 10_000)
        .ok_or(Error::Convergence {
            dim: grid.nrows().max(grid.ncols()),
            iterations: 10_000,
        })?;
    let (u, vt) = (
        svd.u.as_ref().expect("requested"),
        svd.v_t.as_ref().expect("requested"),
    );
    let s = &svd.singular_values;
    let smax = s.iter().fold(0.0_f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > RANK_TOL * smax).collect();
    let left_sq = (0..u.nrows())
        .map(|j| {
            keep.iter()
                .map(|&i| u[(j, i)].norm_sqr() * s[i])
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let right_sq = (0..vt.ncols())
        .map(|k| {
            keep.iter()
                .map(|&i| vt[(i, k)].norm_sqr() * s[i])
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let balanced = (left_sq * right_sq).sqrt();
    Ok(by_columns.min(by_rows).min(balanced))
}

/// Upper bound for the first-kind triple integral's Sₚ constant on the
/// given spectra: `Σ_l upper(Ψ(·, ·, y_l))`, from writing the integral as
/// `Σ_l D_l R_l` with double integrals `D_l` and `‖R_l‖ ≤ 1`.
pub fn triple_first_grid_upper_bound(
    psi: &dyn TripleIntegrand,
    e1: &SpectralMeasure,
    e2: &SpectralMeasure,
    e3: &SpectralMeasure,
) -> Result<f64> {
    let grid = psi.grid(e1.points(), e2.points(), e3.points())?;
    (0..grid.dims[2])
        .map(|l| schur_upper(&grid.slice_last(l)))
        .sum()
}

/// Largest singular value; handy for norm contracts.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{frobenius, identity, random_hermitian, Ensemble};

    #[test]
    fn constant_integrand_returns_q() {
        let a = random_hermitian(5, &Ensemble::Gue, 0.0, 1).unwrap();
        let b = random_hermitian(5, &Ensemble::Gue, 0.0, 2).unwrap();
        let q = random_hermitian(5, &Ensemble::Gue, 0.0, 3)
            .unwrap()
            .into_matrix()
            * C64::new(0.3, 1.0);
        let (ea, eb) = (
            SpectralMeasure::of(&a).unwrap(),
            SpectralMeasure::of(&b).unwrap(),
        );
        let one = FunctionR2::constant(C64::new(1.0, 0.0));
        let r = double_operator_integral(&one, &ea, &q, &eb).unwrap();
        assert!(frobenius(&(r.value - &q)) < 1e-13);
        assert_eq!(r.kind, IntegralKind::Double);
    }

    #[test]
    fn product_example_matches_matrix_product() {
        let a = HermitianMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        let b = HermitianMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let xy = FunctionR2::from_fn("xy", |x, y| C64::new(x * y, 0.0));
        let v = f_of_pair(&xy, &a, &b).unwrap();
        let expected =
            CMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0].map(|x| C64::new(x, 0.0)));
        assert!(frobenius(&(v - expected)) < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let a = SpectralMeasure::of(&HermitianMatrix::from_diagonal(&[1.0, 2.0]).unwrap()).unwrap();
        let b = SpectralMeasure::of(&HermitianMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap())
            .unwrap();
        let one = FunctionR2::constant(C64::new(1.0, 0.0));
        assert!(double_operator_integral(&one, &a, &identity(2), &b).is_err());
        let psi = FnIntegrand::new("1", |_, _, _| C64::new(1.0, 0.0));
        assert!(triple_oi_first(&psi, &a, &identity(2), &a, &b).is_err());
        assert!(f_of_measures(&one, &a, &b).is_err());
    }

    #[test]
    fn commuting_sum() {
        let d = HermitianMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let f = FunctionR2::coordinate_x().sum(&FunctionR2::coordinate_y());
        let v = f_of_pair(&f, &d, &d).unwrap();
        let want = HermitianMatrix::from_diagonal(&[2.0, 4.0])
            .unwrap()
            .into_matrix();
        assert!(frobenius(&(v - want)) < 1e-15);
        let c = f_of_pair(&FunctionR2::constant(C64::new(2.5, -1.0)), &d, &d).unwrap();
        assert!(frobenius(&(c - identity(2) * C64::new(2.5, -1.0))) < 1e-15);
    }

    #[test]
    fn sharp_path_small_cases() {
        let a = random_hermitian(6, &Ensemble::Gue, 0.0, 10).unwrap();
        let b = random_hermitian(6, &Ensemble::Gue, 0.0, 11).unwrap();
        let y = f_of_pair_sharp(&FunctionR2::coordinate_y(), &a, &b).unwrap();
        assert!(frobenius(&(y - b.as_matrix())) < 1e-13);
        let one = f_of_pair_sharp(&FunctionR2::constant(C64::new(1.0, 0.0)), &a, &b).unwrap();
        assert!(frobenius(&(one - identity(6))) < 1e-13);
    }

    #[test]
    fn schur_bounds_examples() {
        let xs = [-1.0, 0.2, 0.7, 3.0];
        let ys = [0.5, 1.5, -2.0];
        let one = FunctionR2::constant(C64::new(1.0, 0.0));
        let b = schur_multiplier_bounds(&one, &xs, &ys, 5, 1).unwrap();
        assert!(
            (b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12,
            "{b:?}"
        );

        let prod = FunctionR2::from_fn("phi psi", |x, y| {
            C64::new(x.sin() + 2.0, 0.0) * C64::new(y.cos(), y)
        });
        let b = schur_multiplier_bounds(&prod, &xs, &ys, 5, 1).unwrap();
        let mx = xs.iter().map(|x| (x.sin() + 2.0).abs()).fold(0.0, f64::max);
        let my = ys
            .iter()
            .map(|&y| C64::new(y.cos(), y).norm())
            .fold(0.0, f64::max);
        assert!((b.upper - mx * my).abs() < 1e-12 * mx * my, "{b:?}");
        assert!((b.lower - mx * my).abs() < 1e-12 * mx * my, "{b:?}");

        assert!(schur_multiplier_bounds(&one, &[], &ys, 5, 1).is_err());
        assert!(schur_multiplier_bounds(&one, &xs, &ys, 0, 1).is_err());
    }
}
