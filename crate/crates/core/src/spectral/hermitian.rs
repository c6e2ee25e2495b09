use nalgebra::linalg::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{max_abs_entry, CMatrix, C64};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const MAX_SWEEPS_PER_DIM: usize = 200;

/// Dense self-adjoint matrix; the finite stand-in for a self-adjoint operator.
///
/// Construction checks `m[j][k] == conj(m[k][j])` within `1e-12 · max|m|`
/// and then stores the exact Hermitian part, so downstream code may treat
/// the matrix as exactly self-adjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::Validation(
                "matrix dimension must be at least 1".into(),
            ));
        }
        if m.nrows() != m.ncols() {
            return Err(Error::Validation(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        let tol = HERMITIAN_TOL * max_abs_entry(&m);
        let n = m.nrows();
        for j in 0..n {
            for k in j..n {
                let gap = (m[(j, k)] - m[(k, j)].conj()).norm();
                if gap > tol {
                    return Err(Error::Validation(format!(
                        "matrix is not Hermitian: entries ({j},{k}) and ({k},{j}) differ by {gap:.3e} after conjugation"
                    )));
                }
            }
        }
        Ok(Self::from_hermitian_part(&m))
    }

    /// Real diagonal matrix with the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(CMatrix::from_fn(n, n, |j, k| {
            if j == k {
                C64::new(diag[j], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Real symmetric matrix from row-major data.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::Validation(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                rows.len()
            )));
        }
        Self::new(CMatrix::from_fn(dim, dim, |j, k| {
            C64::new(rows[j * dim + k], 0.0)
        }))
    }

    /// `V · diag(λ) · V*`; `v` must be unitary for the result to have spectrum `λ`.
    pub fn from_spectrum(values: &[f64], v: &CMatrix) -> Self {
        let mut scaled = v.clone();
        for (k, &lam) in values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(lam);
        }
        Self::from_hermitian_part(&(scaled * v.adjoint()))
    }

    pub(crate) fn from_hermitian_part(m: &CMatrix) -> Self {
        let inner = (m + m.adjoint()).map(|z| z * 0.5);
        Self { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn max_abs_entry(&self) -> f64 {
        max_abs_entry(&self.inner)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> CMatrix {
        &self.inner - &other.inner
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self::from_hermitian_part(&(&self.inner + &other.inner))
    }

    pub fn to_doc(&self) -> MatrixDoc {
        MatrixDoc::from_matrix(&self.inner)
    }
}

/// Matrix exchange document: `{dim, entries: [[re, im], ...]}` in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * m.ncols());
        for j in 0..dim {
            for k in 0..m.ncols() {
                let z = m[(j, k)];
                entries.push([z.re, z.im]);
            }
        }
        Self { dim, entries }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::Validation(format!(
                "matrix document declares dim {} but holds {} entries (expected {})",
                self.dim,
                self.entries.len(),
                self.dim * self.dim
            )));
        }
        let d = self.dim;
        Ok(CMatrix::from_fn(d, d, |j, k| {
            let [re, im] = self.entries[j * d + k];
            C64::new(re, im)
        }))
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix()?)
    }
}

/// Eigenvalues in ascending order with the matching unitary eigenvector matrix
/// (eigenvector `k` is column `k`).
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn reconstruct(&self) -> CMatrix {
        HermitianMatrix::from_spectrum(&self.values, &self.vectors).into_matrix()
    }
}

pub fn eigendecompose(h: &HermitianMatrix) -> Result<Eigen> {
    let n = h.dim();
    let max_iter = MAX_SWEEPS_PER_DIM * n.max(1);
    let eig = SymmetricEigen::try_new(h.as_matrix().clone(), f64::EPSILON, max_iter).ok_or(
        Error::Convergence {
            dim: n,
            iterations: max_iter,
        },
    )?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{frobenius, identity};

    #[test]
    fn rejects_non_hermitian_and_names_the_pair() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 2)] = C64::new(1.0, 0.0);
        let err = HermitianMatrix::new(m).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("(0,2)"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_matrix() {
        assert!(HermitianMatrix::new(CMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let h = HermitianMatrix::from_diagonal(&[2.0, -1.0]).unwrap();
        let e = eigendecompose(&h).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0]);
        for z in e.vectors.iter() {
            assert!(z.norm() < 1e-15 || (z.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pauli_x() {
        let h = HermitianMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = eigendecompose(&h).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn doc_roundtrip_and_length_check() {
        let h = HermitianMatrix::from_real_rows(2, &[1.0, 2.0, 2.0, 3.0]).unwrap();
        let doc = h.to_doc();
        assert_eq!(doc.to_hermitian().unwrap(), h);
        let bad = MatrixDoc {
            dim: 2,
            entries: vec![[0.0, 0.0]; 3],
        };
        assert!(bad.to_matrix().is_err());
    }

    #[test]
    fn unitary_eigenvectors() {
        let h = HermitianMatrix::new(CMatrix::from_fn(5, 5, |j, k| {
            let (a, b) = (j as f64, k as f64);
            C64::new((a + b).cos(), if j == k { 0.0 } else { (a - b).sin() })
        }))
        .unwrap();
        let e = eigendecompose(&h).unwrap();
        let vv = e.vectors.adjoint() * &e.vectors;
        assert!(frobenius(&(vv - identity(5))) < 1e-13);
        assert!(frobenius(&(e.reconstruct() - h.as_matrix())) < 1e-13);
    }
}
