use std::fmt;

use nalgebra::linalg::SVD;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CMatrix;
use crate::error::{Error, Result};

/// Schatten–von Neumann index `p ∈ [1, ∞]`; `∞` selects the operator norm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SchattenIndex(f64);

impl SchattenIndex {
    pub const TRACE: SchattenIndex = SchattenIndex(1.0);
    pub const HILBERT_SCHMIDT: SchattenIndex = SchattenIndex(2.0);
    pub const OPERATOR: SchattenIndex = SchattenIndex(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Validation(format!(
                "Schatten index must satisfy p >= 1, got {p}"
            )));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_operator_norm(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for SchattenIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

// JSON has no infinity, so `∞` travels as the string "inf".
impl Serialize for SchattenIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for SchattenIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Text(t) => match t.trim() {
                "inf" | "infinity" | "Inf" | "∞" => f64::INFINITY,
                other => other.parse().map_err(serde::de::Error::custom)?,
            },
        };
        SchattenIndex::new(p).map_err(serde::de::Error::custom)
    }
}

const SVD_MAX_ITER: usize = 10_000;

/// Singular values, in no particular order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, SVD_MAX_ITER).ok_or(
        Error::Convergence {
            dim: m.nrows().max(m.ncols()),
            iterations: SVD_MAX_ITER,
        },
    )?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// `(Σ σᵢᵖ)^{1/p}` over the singular values of `m`; `max σᵢ` for `p = ∞`.
pub fn schatten_norm(m: &CMatrix, p: SchattenIndex) -> Result<f64> {
    let s = singular_values(m)?;
    Ok(norm_from_singular_values(&s, p))
}

pub(crate) fn norm_from_singular_values(s: &[f64], p: SchattenIndex) -> f64 {
    let smax = s.iter().fold(0.0_f64, |a, &b| a.max(b));
    if p.is_operator_norm() || smax == 0.0 {
        return smax;
    }
    let p = p.value();
    if p == 1.0 {
        return s.iter().sum();
    }
    // scale by the largest value to keep σᵖ in range
    let sum: f64 = s.iter().map(|&x| (x / smax).powf(p)).sum();
    smax * sum.powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{HermitianMatrix, C64};

    fn p(v: f64) -> SchattenIndex {
        SchattenIndex::new(v).unwrap()
    }

    #[test]
    fn diagonal_examples() {
        let m = HermitianMatrix::from_diagonal(&[3.0, -4.0])
            .unwrap()
            .into_matrix();
        assert!((schatten_norm(&m, p(1.0)).unwrap() - 7.0).abs() < 1e-14);
        assert!((schatten_norm(&m, p(2.0)).unwrap() - 5.0).abs() < 1e-14);
        assert!((schatten_norm(&m, SchattenIndex::OPERATOR).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn rank_one_outer_product() {
        let u = [C64::new(1.0, 2.0), C64::new(-0.5, 0.0), C64::new(0.0, 3.0)];
        let v = [C64::new(2.0, 0.0), C64::new(1.0, -1.0), C64::new(0.25, 0.5)];
        let m = CMatrix::from_fn(3, 3, |j, k| u[j] * v[k].conj());
        let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for q in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            let got = schatten_norm(&m, p(q)).unwrap();
            assert!((got - nu * nv).abs() < 1e-12 * nu * nv, "p={q}: {got}");
        }
    }

    #[test]
    fn rejects_p_below_one() {
        assert!(SchattenIndex::new(0.5).is_err());
        assert!(SchattenIndex::new(f64::NAN).is_err());
    }

    #[test]
    fn serde_infinity_as_text() {
        let s = serde_json::to_string(&SchattenIndex::OPERATOR).unwrap();
        assert_eq!(s, "\"inf\"");
        let back: SchattenIndex = serde_json::from_str(&s).unwrap();
        assert!(back.is_operator_norm());
        let x: SchattenIndex = serde_json::from_str("1.5").unwrap();
        assert_eq!(x.value(), 1.5);
        assert!(serde_json::from_str::<SchattenIndex>("0.5").is_err());
    }

    #[test]
    fn zero_matrix() {
        let m = CMatrix::zeros(3, 3);
        assert_eq!(schatten_norm(&m, p(1.5)).unwrap(), 0.0);
    }
}
