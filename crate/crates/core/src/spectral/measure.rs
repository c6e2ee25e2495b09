use std::ops::Range;

use super::{eigendecompose, CMatrix, Eigen, HermitianMatrix};
use crate::error::{Error, Result};

/// Relative tolerance (against `max(1, spectral radius)`) below which
/// neighbouring eigenvalues are treated as one spectral point.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Spectral measure of a Hermitian matrix: distinct spectral points with their
/// orthogonal eigenprojections.
///
/// Projections are kept in factored form. Point `j` owns the eigenvector
/// columns `ranges[j]` of `basis`, so `P_j = V_j V_j*`. Operator integrals
/// work in these bases directly and never materialize the projections.
#[derive(Clone, Debug)]
pub struct SpectralMeasure {
    points: Vec<f64>,
    eigenvalues: Vec<f64>,
    basis: CMatrix,
    ranges: Vec<Range<usize>>,
    column_point: Vec<usize>,
}

pub fn spectral_measure(h: &HermitianMatrix, cluster_tol: f64) -> Result<SpectralMeasure> {
    if !(cluster_tol >= 0.0) || !cluster_tol.is_finite() {
        return Err(Error::Validation(format!(
            "cluster_tol must be a finite nonnegative number, got {cluster_tol}"
        )));
    }
    let eig = eigendecompose(h)?;
    Ok(SpectralMeasure::from_eigen(eig, cluster_tol))
}

impl SpectralMeasure {
    /// Builds the measure from a known eigendecomposition (values ascending,
    /// unitary columns). Exact spectra make exact coincidences between
    /// measures reproducible.
    pub fn from_eigen(eig: Eigen, cluster_tol: f64) -> SpectralMeasure {
        let threshold = cluster_tol * eig.spectral_radius().max(1.0);

        let n = eig.values.len();
        let mut ranges = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || eig.values[i] - eig.values[i - 1] > threshold {
                ranges.push(start..i);
                start = i;
            }
        }
        let points = ranges
            .iter()
            .map(|r| eig.values[r.clone()].iter().sum::<f64>() / r.len() as f64)
            .collect();
        let mut column_point = vec![0; n];
        for (j, r) in ranges.iter().enumerate() {
            for c in r.clone() {
                column_point[c] = j;
            }
        }
        SpectralMeasure {
            points,
            eigenvalues: eig.values,
            basis: eig.vectors,
            ranges,
            column_point,
        }
    }

    /// Spectral measure with the default clustering tolerance.
    pub fn of(h: &HermitianMatrix) -> Result<Self> {
        spectral_measure(h, DEFAULT_CLUSTER_TOL)
    }

    /// Distinct spectral points, strictly increasing.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of distinct spectral points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Raw eigenvalues, ascending, one per basis column.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary matrix of eigenvectors, grouped by spectral point.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// For each basis column, the index of the spectral point it belongs to.
    pub fn column_points(&self) -> &[usize] {
        &self.column_point
    }

    pub fn rank(&self, j: usize) -> usize {
        self.ranges[j].len()
    }

    pub fn projection(&self, j: usize) -> CMatrix {
        let r = &self.ranges[j];
        let v = self.basis.columns(r.start, r.len());
        v * v.adjoint()
    }

    pub fn projections(&self) -> Vec<CMatrix> {
        (0..self.len()).map(|j| self.projection(j)).collect()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.points.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// `∫ g dE = Σ g(point_j) P_j` for a complex-valued `g`.
    pub fn apply_fn(&self, g: impl Fn(f64) -> super::C64) -> CMatrix {
        let mut scaled = self.basis.clone();
        for (c, &j) in self.column_point.iter().enumerate() {
            let w = g(self.points[j]);
            for z in scaled.column_mut(c).iter_mut() {
                *z *= w;
            }
        }
        scaled * self.basis.adjoint()
    }

    /// `Σ point_j P_j`, which reconstructs the source matrix.
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|x| super::C64::new(x, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{frobenius, identity, random_hermitian, Ensemble};

    fn check_invariants(m: &SpectralMeasure, h: &HermitianMatrix) {
        let n = m.dim();
        let projections = m.projections();
        let mut sum = CMatrix::zeros(n, n);
        for (i, p) in projections.iter().enumerate() {
            assert!(frobenius(&(p - p.adjoint())) < 1e-10);
            assert!(frobenius(&(p * p - p)) < 1e-10);
            for q in projections.iter().skip(i + 1) {
                assert!(frobenius(&(p * q)) < 1e-10);
            }
            sum += p;
        }
        assert!(frobenius(&(sum - identity(n))) < 1e-10);
        let radius = m.spectral_radius().max(1.0);
        assert!(frobenius(&(m.reconstruct() - h.as_matrix())) < 1e-10 * radius);
        assert!(m.points().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exact_degeneracy_merges_at_zero_tolerance() {
        let h = HermitianMatrix::from_diagonal(&[1.0, 1.0, 2.0]).unwrap();
        let m = spectral_measure(&h, 0.0).unwrap();
        assert_eq!(m.points(), &[1.0, 2.0]);
        assert_eq!((m.rank(0), m.rank(1)), (2, 1));
        check_invariants(&m, &h);
    }

    #[test]
    fn near_degeneracy_is_forced_to_merge() {
        let h = HermitianMatrix::from_diagonal(&[0.0, 1e-14, 1.0]).unwrap();
        let m = spectral_measure(&h, 1e-10).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.rank(0), 2);
        assert!((m.points()[0] - 5e-15).abs() < 1e-20);
    }

    #[test]
    fn gapped_random_matrix_has_singleton_points() {
        let h = random_hermitian(8, &Ensemble::Gue, 1e-3, 11).unwrap();
        let m = spectral_measure(&h, 1e-8).unwrap();
        assert_eq!(m.len(), 8);
        check_invariants(&m, &h);
    }

    #[test]
    fn negative_tolerance_rejected() {
        let h = HermitianMatrix::from_diagonal(&[1.0]).unwrap();
        assert!(spectral_measure(&h, -1.0).is_err());
    }

    #[test]
    fn invariants_hold_on_many_seeds() {
        for seed in 0..200u64 {
            let dim = 1 + (seed as usize % 12);
            let ensemble = if seed % 2 == 0 {
                Ensemble::Gue
            } else {
                Ensemble::SpreadSpectrum { radius: 50.0 }
            };
            let h = random_hermitian(dim, &ensemble, 0.0, seed).unwrap();
            let m = spectral_measure(&h, DEFAULT_CLUSTER_TOL).unwrap();
            check_invariants(&m, &h);
        }
    }
}
