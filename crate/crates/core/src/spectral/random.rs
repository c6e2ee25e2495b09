use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{eigendecompose, schatten_norm, CMatrix, HermitianMatrix, SchattenIndex, C64};
use crate::error::{Error, Result};

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for stream `index` from a master seed
/// (splitmix64 finalizer), so per-trial streams do not depend on scheduling.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random Hermitian ensembles.
///
/// `Gue` is scaled by `1/√dim` so its spectrum fills roughly `[−2, 2]`.
/// `SpreadSpectrum` places eigenvalues uniformly in `[−radius, radius]` with
/// Haar-distributed eigenvectors; large radii stand in for unbounded operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Ensemble {
    Gue,
    SpreadSpectrum { radius: f64 },
}

impl Ensemble {
    fn validate(&self) -> Result<()> {
        match self {
            Ensemble::Gue => Ok(()),
            Ensemble::SpreadSpectrum { radius } if *radius > 0.0 && radius.is_finite() => Ok(()),
            Ensemble::SpreadSpectrum { radius } => Err(Error::Parameter(format!(
                "spread-spectrum radius must be positive, got {radius}"
            ))),
        }
    }

    /// Nominal width of the spectrum, used to express gaps relative to range.
    pub fn range(&self) -> f64 {
        match self {
            Ensemble::Gue => 4.0,
            Ensemble::SpreadSpectrum { radius } => 2.0 * radius,
        }
    }
}

fn complex_normal(rng: &mut Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gue(dim: usize, rng: &mut Rng) -> HermitianMatrix {
    let scale = 1.0 / (dim as f64).sqrt();
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        m[(j, j)] = C64::new(d * scale, 0.0);
        for k in j + 1..dim {
            let z = complex_normal(rng) * scale;
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
        }
    }
    HermitianMatrix::from_hermitian_part(&m)
}

/// Haar-distributed unitary (QR of a complex Ginibre matrix with phase correction).
pub fn random_unitary(dim: usize, rng: &mut Rng) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for z in q.column_mut(k).iter_mut() {
            *z *= phase;
        }
    }
    q
}

/// Sorted spectrum with consecutive gaps of at least `gap` inside `[−radius, radius]`.
fn spread_spectrum(dim: usize, radius: f64, gap: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    let needed = gap * dim.saturating_sub(1) as f64;
    if needed > 2.0 * radius {
        return Err(Error::Parameter(format!(
            "min_gap {gap} is infeasible: {dim} eigenvalues need width {needed} but the spectrum has width {}",
            2.0 * radius
        )));
    }
    // a slightly inflated gap keeps the enforced bound strict after round-off
    let gap = if dim > 1 {
        (gap * (1.0 + 1e-8) + 1e-12 * radius).min(2.0 * radius / (dim - 1) as f64)
    } else {
        gap
    };
    let slack = 2.0 * radius - gap * dim.saturating_sub(1) as f64;
    let mut u: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * slack).collect();
    u.sort_by(f64::total_cmp);
    Ok(u.iter()
        .enumerate()
        .map(|(i, &x)| -radius + x + i as f64 * gap)
        .collect())
}

/// Moves sorted `values` upward as little as needed so that every value sits at
/// least `gap` away from its predecessor and from every point of `avoid`.
fn respace(values: &mut [f64], gap: f64, avoid: &[f64]) {
    if gap <= 0.0 && avoid.is_empty() {
        return;
    }
    let mut fixed: Vec<f64> = avoid.to_vec();
    fixed.sort_by(f64::total_cmp);
    let mut prev: Option<f64> = None;
    for v in values.iter_mut() {
        let mut pos = match prev {
            Some(p) => v.max(p + gap),
            None => *v,
        };
        loop {
            let clash = fixed.iter().find(|&&f| (pos - f).abs() < gap);
            match clash {
                Some(&f) => {
                    pos = f + gap;
                    while pos - f < gap {
                        pos = pos.next_up();
                    }
                }
                None => break,
            }
        }
        *v = pos;
        prev = Some(pos);
    }
}

/// `h` itself when its eigenvalues already keep distance `min_gap` from each
/// other and from `avoid`; otherwise `h` rebuilt on its own eigenvectors with
/// minimally shifted eigenvalues.
pub fn respaced(h: &HermitianMatrix, min_gap: f64, avoid: &[f64]) -> Result<HermitianMatrix> {
    let eig = eigendecompose(h)?;
    let too_close = min_gap_of(&eig.values) < min_gap
        || eig
            .values
            .iter()
            .any(|v| avoid.iter().any(|a| (v - a).abs() < min_gap));
    if !too_close {
        return Ok(h.clone());
    }
    let mut values = eig.values.clone();
    let scale = eig.spectral_radius().max(1.0);
    respace(&mut values, min_gap * (1.0 + 1e-8) + 1e-14 * scale, avoid);
    Ok(HermitianMatrix::from_spectrum(&values, &eig.vectors))
}

fn min_gap_of(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Seeded random Hermitian matrix whose eigenvalue gaps are at least `min_gap`.
pub fn random_hermitian(
    dim: usize,
    ensemble: &Ensemble,
    min_gap: f64,
    seed: u64,
) -> Result<HermitianMatrix> {
    random_hermitian_avoiding(dim, ensemble, min_gap, &[], seed)
}

/// As [`random_hermitian`], and additionally every eigenvalue keeps distance
/// `min_gap` from each point of `avoid`. Used to keep the spectra of `A₁` and
/// `A₂` disjoint so divided differences never need the derivative branch.
pub fn random_hermitian_avoiding(
    dim: usize,
    ensemble: &Ensemble,
    min_gap: f64,
    avoid: &[f64],
    seed: u64,
) -> Result<HermitianMatrix> {
    if dim == 0 {
        return Err(Error::Parameter("dim must be at least 1".into()));
    }
    if !(min_gap >= 0.0) || !min_gap.is_finite() {
        return Err(Error::Parameter(format!(
            "min_gap must be finite and nonnegative, got {min_gap}"
        )));
    }
    ensemble.validate()?;
    let mut rng = rng_from_seed(seed);
    match ensemble {
        Ensemble::Gue => {
            let h = gue(dim, &mut rng);
            if min_gap == 0.0 && avoid.is_empty() {
                return Ok(h);
            }
            respaced(&h, min_gap, avoid)
        }
        Ensemble::SpreadSpectrum { radius } => {
            let mut values = spread_spectrum(dim, *radius, min_gap, &mut rng)?;
            if !avoid.is_empty() {
                let target = min_gap * (1.0 + 1e-8) + 1e-12 * radius;
                respace(&mut values, target, avoid);
            }
            let v = random_unitary(dim, &mut rng);
            Ok(HermitianMatrix::from_spectrum(&values, &v))
        }
    }
}

/// A base operator together with a perturbation of controlled Schatten norm.
#[derive(Clone, Debug)]
pub struct PerturbedPair {
    pub base: HermitianMatrix,
    pub perturbed: HermitianMatrix,
    /// The Hermitian perturbation `perturbed − base` as generated (before the sum is rounded).
    pub difference: HermitianMatrix,
    pub perturbation_norm: f64,
    pub p: SchattenIndex,
}

/// Returns `(H, H + D)` with `D` Hermitian and `‖D‖_p = target`.
pub fn prescribed_perturbation(
    h: &HermitianMatrix,
    p: SchattenIndex,
    target: f64,
    seed: u64,
) -> Result<PerturbedPair> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Parameter(format!(
            "perturbation target must be positive, got {target}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let raw = gue(h.dim(), &mut rng);
    let norm = schatten_norm(raw.as_matrix(), p)?;
    let d = if norm > 0.0 {
        HermitianMatrix::from_hermitian_part(&raw.as_matrix().map(|z| z * (target / norm)))
    } else {
        // 1x1 draw of exactly zero; fall back to the identity direction
        HermitianMatrix::from_hermitian_part(
            &CMatrix::identity(h.dim(), h.dim()).map(|z| z * target),
        )
    };
    let perturbation_norm = schatten_norm(d.as_matrix(), p)?;
    Ok(PerturbedPair {
        base: h.clone(),
        perturbed: h.add(&d),
        difference: d,
        perturbation_norm,
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gue_is_deterministic() {
        let a = random_hermitian(4, &Ensemble::Gue, 0.0, 7).unwrap();
        let b = random_hermitian(4, &Ensemble::Gue, 0.0, 7).unwrap();
        assert_eq!(a, b);
        let c = random_hermitian(4, &Ensemble::Gue, 0.0, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn spread_spectrum_respects_gap() {
        let h = random_hermitian(3, &Ensemble::SpreadSpectrum { radius: 100.0 }, 1.0, 1).unwrap();
        let e = eigendecompose(&h).unwrap();
        assert!(min_gap_of(&e.values) >= 1.0, "{:?}", e.values);
        assert!(e.values.iter().all(|v| v.abs() <= 100.0 + 1e-9));
    }

    #[test]
    fn respace_terminates_when_sums_round_down() {
        let avoid = [0.1, 1e8 + 0.3];
        let mut values = vec![0.1, 1e8 + 0.3];
        respace(&mut values, 1e-9, &avoid);
        for (v, a) in values.iter().zip(avoid) {
            assert!(v - a >= 1e-9);
        }
    }

    #[test]
    fn gue_respacing_enforces_gap() {
        for seed in 0..20 {
            let h = random_hermitian(16, &Ensemble::Gue, 0.05, seed).unwrap();
            let e = eigendecompose(&h).unwrap();
            assert!(
                min_gap_of(&e.values) >= 0.05,
                "seed {seed}: {}",
                min_gap_of(&e.values)
            );
        }
    }

    #[test]
    fn avoiding_keeps_spectra_disjoint() {
        let ens = Ensemble::Gue;
        let a = random_hermitian(12, &ens, 1e-3, 3).unwrap();
        let ea = eigendecompose(&a).unwrap();
        let b = random_hermitian_avoiding(12, &ens, 1e-3, &ea.values, 4).unwrap();
        let eb = eigendecompose(&b).unwrap();
        for x in &ea.values {
            for y in &eb.values {
                assert!((x - y).abs() >= 1e-3);
            }
        }
    }

    #[test]
    fn dim_one() {
        let h = random_hermitian(1, &Ensemble::Gue, 0.0, 5).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.as_matrix()[(0, 0)].im, 0.0);
    }

    #[test]
    fn infeasible_gap_is_a_parameter_error() {
        let err =
            random_hermitian(10, &Ensemble::SpreadSpectrum { radius: 1.0 }, 1.0, 0).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
        assert!(random_hermitian(0, &Ensemble::Gue, 0.0, 0).is_err());
        assert!(random_hermitian(2, &Ensemble::SpreadSpectrum { radius: -1.0 }, 0.0, 0).is_err());
    }

    #[test]
    fn prescribed_norm_is_exact() {
        let h = random_hermitian(6, &Ensemble::Gue, 0.0, 2).unwrap();
        let pair = prescribed_perturbation(&h, SchattenIndex::TRACE, 0.5, 9).unwrap();
        let d = pair.perturbed.sub(&pair.base);
        assert!((schatten_norm(&d, SchattenIndex::TRACE).unwrap() - 0.5).abs() <= 5e-13);
        let pair = prescribed_perturbation(&h, SchattenIndex::OPERATOR, 1.0, 9).unwrap();
        let d = pair.difference.as_matrix();
        assert!((schatten_norm(d, SchattenIndex::OPERATOR).unwrap() - 1.0).abs() <= 1e-12);
        let again = prescribed_perturbation(&h, SchattenIndex::OPERATOR, 1.0, 9).unwrap();
        assert_eq!(again.difference, pair.difference);
        assert!(prescribed_perturbation(&h, SchattenIndex::OPERATOR, 0.0, 9).is_err());
    }

    #[test]
    fn split_seed_spreads() {
        let a = split_seed(1, 0);
        let b = split_seed(1, 1);
        let c = split_seed(2, 0);
        assert!(a != b && a != c && b != c);
        assert_eq!(split_seed(1, 0), a);
    }
}
