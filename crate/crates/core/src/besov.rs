//! Littlewood–Paley decomposition with piecewise-linear dyadic windows and
//! interval-valued `B¹_{∞,1}` norms.
//!
//! Window family: `w_0 = 1` on `[0, 1]` falling linearly to 0 at 2; for
//! `n ≥ 1`, `w_n` is the tent on `[2ⁿ⁻¹, 2ⁿ⁺¹]` peaking at `2ⁿ`. The
//! homogeneous family uses the tent for every `n ∈ ℤ`. Both families are
//! exact partitions of unity and at most two windows overlap at any radius.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{sup_norm_of_modes, FourierMode, FunctionR2, SUP_GRID_SAMPLES};
use crate::interval::Interval;
use crate::spectral::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BesovFlavor {
    Inhomogeneous,
    Homogeneous,
}

/// The dyadic tent window family.
#[derive(Clone, Copy, Debug, Default)]
pub struct LpWindowFamily;

impl LpWindowFamily {
    /// Dyadic tent on `[2ⁿ⁻¹, 2ⁿ⁺¹]` with peak 1 at `2ⁿ`.
    pub fn tent(n: i32, r: f64) -> f64 {
        let peak = 2f64.powi(n);
        let lo = 0.5 * peak;
        let hi = 2.0 * peak;
        if r <= lo || r >= hi {
            0.0
        } else if r <= peak {
            (r - lo) / lo
        } else {
            (hi - r) / peak
        }
    }

    /// Inhomogeneous window `w_n(r)`, `n ≥ 0`.
    pub fn weight(n: i32, r: f64) -> f64 {
        match n {
            n if n < 0 => 0.0,
            0 if r <= 1.0 => 1.0,
            0 if r < 2.0 => 2.0 - r,
            0 => 0.0,
            n => Self::tent(n, r),
        }
    }

    /// Homogeneous window `w_n(r)`, `n ∈ ℤ`; all windows vanish at `r = 0`.
    pub fn weight_homogeneous(n: i32, r: f64) -> f64 {
        Self::tent(n, r)
    }

    /// Nonzero `(n, w_n(r))` pairs at radius `r`, ascending in `n`.
    pub fn active(r: f64, flavor: BesovFlavor) -> Vec<(i32, f64)> {
        if flavor == BesovFlavor::Inhomogeneous && r < 2.0 {
            return [(0, Self::weight(0, r)), (1, Self::weight(1, r))]
                .into_iter()
                .filter(|&(_, w)| w > 0.0)
                .collect();
        }
        if r <= 0.0 || !r.is_finite() {
            return Vec::new();
        }
        let m = dyadic_floor(r);
        [(m, Self::tent(m, r)), (m + 1, Self::tent(m + 1, r))]
            .into_iter()
            .filter(|&(_, w)| w > 0.0)
            .collect()
    }
}

/// Largest `m` with `2^m ≤ r`.
fn dyadic_floor(r: f64) -> i32 {
    let mut m = r.log2().floor() as i32;
    while 2f64.powi(m) > r {
        m -= 1;
    }
    while 2f64.powi(m + 1) <= r {
        m += 1;
    }
    m
}

/// Grid parameters for the sampled path.
///
/// Samples `samples × samples` points on `[−L, L]²` with
/// `L = 8π / lowest_frequency`, so the lowest retained frequency spans at
/// least eight periods of the box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledGrid {
    pub samples: usize,
    pub lowest_frequency: f64,
}

impl Default for SampledGrid {
    fn default() -> Self {
        Self {
            samples: 1024,
            lowest_frequency: 1.0,
        }
    }
}

impl SampledGrid {
    pub fn half_width(&self) -> f64 {
        8.0 * std::f64::consts::PI / self.lowest_frequency
    }
}

/// Relative energy in the Nyquist row/column above which the grid is rejected.
pub const ALIASING_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum BlockRepr {
    /// Catalog path: the block is itself a trigonometric sum.
    Catalog(FunctionR2),
    /// Sampled path: block values on the grid, row-major.
    Sampled {
        values: Arc<Vec<C64>>,
        samples: usize,
        half_width: f64,
    },
}

#[derive(Clone, Debug)]
pub struct LpBlock {
    pub n: i32,
    pub block: BlockRepr,
    pub sup_norm: Interval,
}

/// Options shared by the decomposition routines.
#[derive(Clone, Copy, Debug)]
pub struct BesovOptions {
    /// Per-axis sample count for catalog sup-norm lower bounds.
    pub sup_grid: usize,
    /// Grid for functions without Fourier metadata.
    pub sampled: SampledGrid,
}

impl Default for BesovOptions {
    fn default() -> Self {
        Self {
            sup_grid: SUP_GRID_SAMPLES,
            sampled: SampledGrid::default(),
        }
    }
}

/// Littlewood–Paley blocks of `f` for the inhomogeneous family.
pub fn lp_blocks(f: &FunctionR2) -> Result<Vec<LpBlock>> {
    lp_blocks_with(f, BesovFlavor::Inhomogeneous, &BesovOptions::default())
}

pub fn lp_blocks_with(
    f: &FunctionR2,
    flavor: BesovFlavor,
    opts: &BesovOptions,
) -> Result<Vec<LpBlock>> {
    match f.fourier_modes() {
        Some(modes) => catalog_blocks(modes, flavor, opts.sup_grid),
        None => sampled_blocks(f, flavor, &opts.sampled),
    }
}

fn check_flavor(modes: &[FourierMode], flavor: BesovFlavor) -> Result<()> {
    if flavor == BesovFlavor::Homogeneous && modes.iter().any(|m| m.radius() == 0.0) {
        return Err(Error::Flavor(
            "homogeneous Besov norm ignores constants; strip the zero-frequency mode first".into(),
        ));
    }
    Ok(())
}

/// Mode coefficients split across windows, grouped by block index (ascending).
pub fn split_modes(
    modes: &[FourierMode],
    flavor: BesovFlavor,
) -> Result<Vec<(i32, Vec<FourierMode>)>> {
    check_flavor(modes, flavor)?;
    let mut blocks: Vec<(i32, Vec<FourierMode>)> = Vec::new();
    for m in modes {
        for (n, w) in LpWindowFamily::active(m.radius(), flavor) {
            let part = FourierMode::new(m.a, m.b, m.coeff * w);
            match blocks.iter_mut().find(|(k, _)| *k == n) {
                Some((_, v)) => v.push(part),
                None => blocks.push((n, vec![part])),
            }
        }
    }
    blocks.sort_by_key(|(n, _)| *n);
    Ok(blocks)
}

fn catalog_blocks(
    modes: &[FourierMode],
    flavor: BesovFlavor,
    sup_grid: usize,
) -> Result<Vec<LpBlock>> {
    let split = split_modes(modes, flavor)?;
    Ok(split
        .into_par_iter()
        .map(|(n, parts)| {
            let sup_norm = sup_norm_of_modes(&parts, sup_grid);
            LpBlock {
                n,
                block: BlockRepr::Catalog(FunctionR2::trig_poly(parts)),
                sup_norm,
            }
        })
        .collect())
}

fn fft2(data: &mut [C64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    data.par_chunks_mut(n).for_each(|row| fft.process(row));
    let mut col = vec![C64::new(0.0, 0.0); n * n];
    // transpose, transform rows, transpose back
    for j in 0..n {
        for k in 0..n {
            col[k * n + j] = data[j * n + k];
        }
    }
    col.par_chunks_mut(n).for_each(|row| fft.process(row));
    for j in 0..n {
        for k in 0..n {
            data[j * n + k] = col[k * n + j];
        }
    }
}

fn sampled_blocks(f: &FunctionR2, flavor: BesovFlavor, grid: &SampledGrid) -> Result<Vec<LpBlock>> {
    let n = grid.samples;
    if n < 4 || n % 2 != 0 {
        return Err(Error::Validation(format!(
            "sampled grid needs an even sample count ≥ 4, got {n}"
        )));
    }
    if !(grid.lowest_frequency > 0.0) {
        return Err(Error::Validation(
            "sampled grid lowest_frequency must be positive".into(),
        ));
    }
    let half = grid.half_width();
    let step = 2.0 * half / n as f64;
    let mut spec: Vec<C64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / n, idx % n);
            f.eval(-half + k as f64 * step, -half + j as f64 * step)
        })
        .collect();
    fft2(&mut spec, n, false);
    let norm = (n * n) as f64;
    for z in spec.iter_mut() {
        *z /= norm;
    }

    let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
    let nyq = n / 2;
    let nyquist: f64 = (0..n)
        .map(|i| spec[nyq * n + i].norm_sqr() + spec[i * n + nyq].norm_sqr())
        .sum::<f64>()
        - spec[nyq * n + nyq].norm_sqr();
    if total > 0.0 && nyquist > ALIASING_TOL * total {
        return Err(Error::GridResolution(format!(
            "{:.3e} of the sampled energy sits at the Nyquist frequency {}; refine the grid",
            nyquist / total,
            std::f64::consts::PI * nyq as f64 / half
        )));
    }
    if flavor == BesovFlavor::Homogeneous
        && spec[0].norm_sqr() > 1e-24 * total.max(f64::MIN_POSITIVE)
    {
        return Err(Error::Flavor(
            "homogeneous Besov norm ignores constants; the sampled function has a zero-frequency component".into(),
        ));
    }

    let freq = |i: usize| -> f64 {
        let k = if i < nyq {
            i as f64
        } else {
            i as f64 - n as f64
        };
        std::f64::consts::PI * k / half
    };
    let radius = |idx: usize| freq(idx % n).hypot(freq(idx / n));

    let mut block_ids: Vec<i32> = Vec::new();
    for (idx, z) in spec.iter().enumerate() {
        if z.norm_sqr() == 0.0 {
            continue;
        }
        for (b, _) in LpWindowFamily::active(radius(idx), flavor) {
            if !block_ids.contains(&b) {
                block_ids.push(b);
            }
        }
    }
    block_ids.sort_unstable();

    let weight = |b: i32, r: f64| match flavor {
        BesovFlavor::Inhomogeneous => LpWindowFamily::weight(b, r),
        BesovFlavor::Homogeneous => LpWindowFamily::weight_homogeneous(b, r),
    };
    let mut blocks = Vec::with_capacity(block_ids.len());
    for b in block_ids {
        let mut part: Vec<C64> = spec
            .iter()
            .enumerate()
            .map(|(idx, z)| z * weight(b, radius(idx)))
            .collect();
        let upper: f64 = part.iter().map(|z| z.norm()).sum();
        fft2(&mut part, n, true);
        let lower = part
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()))
            .min(upper);
        blocks.push(LpBlock {
            n: b,
            block: BlockRepr::Sampled {
                values: Arc::new(part),
                samples: n,
                half_width: half,
            },
            sup_norm: Interval::new(lower, upper),
        });
    }
    Ok(blocks)
}

/// Per-block sup-norm bracket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockNorm {
    pub n: i32,
    pub lower: f64,
    pub upper: f64,
}

/// Block sup-norms and the resulting Besov norms.
///
/// `homogeneous_norm` is absent when `f` has a zero-frequency component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovReport {
    pub function: String,
    pub block_norms: Vec<BlockNorm>,
    pub inhomogeneous_norm: Interval,
    pub homogeneous_norm: Option<Interval>,
}

/// One CSV row: block index, dyadic weight, sup-norm bracket and the
/// weighted contribution `2ⁿ · sup-norm` to the inhomogeneous norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovRow {
    pub n: i32,
    pub lower: f64,
    pub upper: f64,
    pub weight: f64,
    pub sup_lower: f64,
    pub sup_upper: f64,
}

impl BesovReport {
    pub fn rows(&self) -> Vec<BesovRow> {
        self.block_norms
            .iter()
            .map(|b| {
                let w = 2f64.powi(b.n);
                BesovRow {
                    n: b.n,
                    lower: w * b.lower,
                    upper: w * b.upper,
                    weight: w,
                    sup_lower: b.lower,
                    sup_upper: b.upper,
                }
            })
            .collect()
    }
}

fn weighted_sum(blocks: &[LpBlock]) -> Interval {
    blocks.iter().map(|b| 2f64.powi(b.n) * b.sup_norm).sum()
}

/// `Σ 2ⁿ · ‖block_n‖_∞` as an interval.
pub fn besov_norm(f: &FunctionR2, flavor: BesovFlavor) -> Result<Interval> {
    besov_norm_with(f, flavor, &BesovOptions::default())
}

pub fn besov_norm_with(
    f: &FunctionR2,
    flavor: BesovFlavor,
    opts: &BesovOptions,
) -> Result<Interval> {
    Ok(weighted_sum(&lp_blocks_with(f, flavor, opts)?))
}

/// Upper end of the inhomogeneous norm of a catalog function without any
/// grid work: `Σ_n 2ⁿ Σ_j |c_j| w_n(|ξ_j|)`.
pub fn besov_upper(f: &FunctionR2, flavor: BesovFlavor) -> Result<f64> {
    let modes = f.fourier_modes().ok_or_else(|| no_modes(f))?;
    Ok(split_modes(modes, flavor)?
        .iter()
        .map(|(n, parts)| 2f64.powi(*n) * parts.iter().map(|m| m.coeff.norm()).sum::<f64>())
        .sum())
}

pub fn besov_report(f: &FunctionR2, opts: &BesovOptions) -> Result<BesovReport> {
    let blocks = lp_blocks_with(f, BesovFlavor::Inhomogeneous, opts)?;
    let homogeneous_norm = match besov_norm_with(f, BesovFlavor::Homogeneous, opts) {
        Ok(v) => Some(v),
        Err(Error::Flavor(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(BesovReport {
        function: f.label().to_string(),
        block_norms: blocks
            .iter()
            .map(|b| BlockNorm {
                n: b.n,
                lower: b.sup_norm.lower,
                upper: b.sup_norm.upper,
            })
            .collect(),
        inhomogeneous_norm: weighted_sum(&blocks),
        homogeneous_norm,
    })
}

fn no_modes(f: &FunctionR2) -> Error {
    Error::Capability(format!("{} carries no Fourier modes", f.label()))
}

/// Radius of the disk containing the Fourier support.
pub fn support_radius(f: &FunctionR2) -> Result<f64> {
    f.support_radius().ok_or_else(|| no_modes(f))
}
