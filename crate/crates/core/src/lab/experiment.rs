use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Mode, Normalizer, Perturb};
use crate::besov::{besov_upper, BesovFlavor};
use crate::error::{Error, Result};
use crate::function::FunctionR2;
use crate::integrals::{f_of_measures, f_of_measures_sharp};
use crate::spectral::{
    prescribed_perturbation, random_hermitian, rng_from_seed, schatten_norm, split_seed, CMatrix,
    Ensemble, HermitianMatrix, SchattenIndex, SpectralMeasure,
};

/// Log-log slope above which a per-dimension trend is flagged as growing.
pub const GROWTH_SLOPE: f64 = 0.1;

/// One Lipschitz ratio measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzTrial {
    /// Index within its `(p, dim)` cell; greedy steps continue after the restarts.
    pub trial: usize,
    pub seed: u64,
    pub p: SchattenIndex,
    pub dim: usize,
    /// Fourier support radius; absent for functions without a spectral description.
    pub sigma: Option<f64>,
    pub function: String,
    pub diff_norm: f64,
    pub pert_norm: f64,
    pub ratio: f64,
    pub besov_norm_upper: Option<f64>,
    pub normalizer: f64,
    pub normalized_ratio: f64,
    pub greedy: bool,
}

/// Maxima over one `(p, dim)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimSummary {
    pub p: SchattenIndex,
    pub dim: usize,
    pub trials: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub max_normalized_ratio: f64,
}

/// Per-dimension trend of the maximum normalized ratio at one `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub p: SchattenIndex,
    pub dims: Vec<usize>,
    pub max_normalized_ratio: Vec<f64>,
    /// Least-squares slope of `ln max` against `ln dim`.
    pub log_log_slope: f64,
    /// Largest over smallest per-dimension maximum.
    pub spread: f64,
    pub grows: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub mode: Mode,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub normalizer: Normalizer,
    pub trials: Vec<LipschitzTrial>,
    pub skipped: usize,
    /// Maximum of `normalized_ratio` over all trials.
    pub empirical_constant: f64,
    pub summary: Vec<DimSummary>,
    pub trends: Vec<TrendSummary>,
}

impl ExperimentReport {
    pub fn recompute_empirical_constant(&self) -> f64 {
        max_of(self.trials.iter().map(|t| t.normalized_ratio))
    }
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

/// `(normalizer, σ, Besov upper bound)` for `f` under the chosen normalizer.
/// Functions without Fourier modes are normalized by 1.
pub fn normalizer_for(f: &FunctionR2, kind: Normalizer) -> Result<(f64, Option<f64>, Option<f64>)> {
    let Some(modes) = f.fourier_modes() else {
        return Ok((1.0, None, None));
    };
    let sigma = f.support_radius();
    let besov = besov_upper(f, BesovFlavor::Inhomogeneous)?;
    let value = match kind {
        Normalizer::Besov => besov,
        Normalizer::SigmaSup => {
            sigma.unwrap_or(0.0) * modes.iter().map(|m| m.coeff.norm()).sum::<f64>()
        }
    };
    Ok((value, sigma, Some(besov)))
}

struct Prepared {
    f: FunctionR2,
    normalizer: f64,
    sigma: Option<f64>,
    besov: Option<f64>,
}

fn prepare(config: &ExperimentConfig) -> Result<Vec<Prepared>> {
    config
        .function_specs()?
        .iter()
        .map(|spec| {
            let f = spec.build()?;
            let (normalizer, sigma, besov) = normalizer_for(&f, config.normalizer)?;
            Ok(Prepared {
                f,
                normalizer,
                sigma,
                besov,
            })
        })
        .collect()
}

/// Unperturbed pair with its function value cached.
struct Base {
    a: HermitianMatrix,
    b: HermitianMatrix,
    value: CMatrix,
}

fn evaluate(
    f: &FunctionR2,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    sharp: bool,
) -> Result<CMatrix> {
    let (ea, eb) = (SpectralMeasure::of(a)?, SpectralMeasure::of(b)?);
    if sharp {
        f_of_measures_sharp(f, &ea, &eb)
    } else {
        f_of_measures(f, &ea, &eb)
    }
}

/// Perturbations `(D_A, D_B)`; a `None` side is left unperturbed.
struct Perturbation {
    da: Option<HermitianMatrix>,
    db: Option<HermitianMatrix>,
}

struct Cell<'a> {
    config: &'a ExperimentConfig,
    ensemble: Ensemble,
    gap: f64,
    p: SchattenIndex,
    dim: usize,
}

impl Cell<'_> {
    fn target(&self, scale: f64) -> f64 {
        let growth = if self.p.is_operator_norm() {
            1.0
        } else {
            (self.dim as f64).powf(1.0 / self.p.value())
        };
        scale * self.ensemble.range() / 4.0 * growth
    }

    fn base(&self, f: &FunctionR2, seed: u64) -> Result<Base> {
        let a = random_hermitian(self.dim, &self.ensemble, self.gap, split_seed(seed, 0))?;
        let b = random_hermitian(self.dim, &self.ensemble, self.gap, split_seed(seed, 1))?;
        let value = evaluate(f, &a, &b, self.config.sharp)?;
        Ok(Base { a, b, value })
    }

    fn initial_perturbation(&self, base: &Base, seed: u64) -> Result<Perturbation> {
        let pc = self.config.perturbation;
        let u: f64 = rng_from_seed(split_seed(seed, 2)).random();
        let scale = (pc.scale_min.ln() + u * (pc.scale_max / pc.scale_min).ln()).exp();
        let target = self.target(scale);
        let side = |h: &HermitianMatrix, k| -> Result<HermitianMatrix> {
            Ok(prescribed_perturbation(h, self.p, target, split_seed(seed, k))?.difference)
        };
        let perturb = self.config.perturb;
        Ok(Perturbation {
            da: (perturb != Perturb::Second)
                .then(|| side(&base.a, 3))
                .transpose()?,
            db: (perturb != Perturb::First)
                .then(|| side(&base.b, 4))
                .transpose()?,
        })
    }

    /// `(diff_norm, pert_norm)` with norms of the differences actually formed.
    fn measure(&self, f: &FunctionR2, base: &Base, d: &Perturbation) -> Result<(f64, f64)> {
        let shifted = |h: &HermitianMatrix, dh: &Option<HermitianMatrix>| match dh {
            Some(dh) => h.add(dh),
            None => h.clone(),
        };
        let a2 = shifted(&base.a, &d.da);
        let b2 = shifted(&base.b, &d.db);
        let pert =
            schatten_norm(&base.a.sub(&a2), self.p)?.max(schatten_norm(&base.b.sub(&b2), self.p)?);
        if pert == 0.0 {
            return Ok((0.0, 0.0));
        }
        let diff = &base.value - evaluate(f, &a2, &b2, self.config.sharp)?;
        Ok((schatten_norm(&diff, self.p)?, pert))
    }

    fn trial(
        &self,
        prep: &Prepared,
        index: usize,
        seed: u64,
        diff: f64,
        pert: f64,
        greedy: bool,
    ) -> LipschitzTrial {
        let ratio = diff / pert;
        let normalized_ratio = if prep.normalizer > 0.0 {
            ratio / prep.normalizer
        } else {
            ratio
        };
        LipschitzTrial {
            trial: index,
            seed,
            p: self.p,
            dim: self.dim,
            sigma: prep.sigma,
            function: prep.f.label().to_string(),
            diff_norm: diff,
            pert_norm: pert,
            ratio,
            besov_norm_upper: prep.besov,
            normalizer: prep.normalizer,
            normalized_ratio,
            greedy,
        }
    }
}

type CellOutcome = (Vec<LipschitzTrial>, usize);

fn cells(config: &ExperimentConfig) -> Vec<(usize, SchattenIndex, usize)> {
    let ps = config.p.values();
    let mut out = Vec::new();
    for (pi, p) in ps.iter().enumerate() {
        for (di, &dim) in config.dims.iter().enumerate() {
            out.push((pi * config.dims.len() + di, *p, dim));
        }
    }
    out
}

fn trial_seed(config: &ExperimentConfig, cell: usize, t: usize) -> u64 {
    split_seed(config.seed, (cell * config.trials + t) as u64)
}

/// Random Lipschitz-ratio trials for every `(p, dim)` cell, `p ∈ [1, 2]`.
///
/// Trial `t` uses function `t mod #functions`. Trials whose perturbation
/// vanishes are skipped and counted.
pub fn lipschitz_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if let Some(p) = config.p.values().iter().find(|p| p.value() > 2.0) {
        return Err(Error::Validation(format!(
            "p: Lipschitz experiments need p in [1, 2], got {p}; use scan mode"
        )));
    }
    let (ensemble, gap) = (config.ensemble.ensemble()?, config.ensemble.min_gap()?);
    let preps = prepare(config)?;
    let jobs: Vec<(usize, SchattenIndex, usize, usize)> = cells(config)
        .into_iter()
        .flat_map(|(c, p, dim)| (0..config.trials).map(move |t| (c, p, dim, t)))
        .collect();
    let results: Vec<Option<LipschitzTrial>> = jobs
        .par_iter()
        .map(|&(c, p, dim, t)| {
            let cell = Cell {
                config,
                ensemble: ensemble.clone(),
                gap,
                p,
                dim,
            };
            let seed = trial_seed(config, c, t);
            let prep = &preps[t % preps.len()];
            let base = cell.base(&prep.f, seed)?;
            let d = cell.initial_perturbation(&base, seed)?;
            let (diff, pert) = cell.measure(&prep.f, &base, &d)?;
            Ok((pert > 0.0).then(|| cell.trial(prep, t, seed, diff, pert, false)))
        })
        .collect::<Result<_>>()?;

    let mut outcomes: Vec<CellOutcome> = vec![(Vec::new(), 0); cells(config).len()];
    for (&(c, ..), r) in jobs.iter().zip(results) {
        match r {
            Some(trial) => outcomes[c].0.push(trial),
            None => outcomes[c].1 += 1,
        }
    }
    Ok(assemble(config, Mode::Lipschitz, outcomes))
}

/// Adversarial search for `p ≥ 2`: `trials` random restarts per cell, then
/// `scan.greedy_steps` local moves from the best restart that keep each
/// perturbation's `Sₚ` norm fixed. `p = 2` serves as the control.
pub fn p_above_2_scan(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if let Some(p) = config.p.values().iter().find(|p| p.value() < 2.0) {
        return Err(Error::Validation(format!("p: scans need p >= 2, got {p}")));
    }
    let (ensemble, gap) = (config.ensemble.ensemble()?, config.ensemble.min_gap()?);
    let preps = prepare(config)?;
    let outcomes: Vec<CellOutcome> = cells(config)
        .par_iter()
        .map(|&(c, p, dim)| {
            let cell = Cell {
                config,
                ensemble: ensemble.clone(),
                gap,
                p,
                dim,
            };
            scan_cell(&cell, c, &preps)
        })
        .collect::<Result<_>>()?;
    Ok(assemble(config, Mode::Scan, outcomes))
}

fn scan_cell(cell: &Cell, c: usize, preps: &[Prepared]) -> Result<CellOutcome> {
    let config = cell.config;
    let restarts: Vec<Option<(LipschitzTrial, Base, Perturbation)>> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(config, c, t);
            let prep = &preps[t % preps.len()];
            let base = cell.base(&prep.f, seed)?;
            let d = cell.initial_perturbation(&base, seed)?;
            let (diff, pert) = cell.measure(&prep.f, &base, &d)?;
            Ok((pert > 0.0).then(|| (cell.trial(prep, t, seed, diff, pert, false), base, d)))
        })
        .collect::<Result<_>>()?;
    let skipped = restarts.iter().filter(|r| r.is_none()).count();
    let mut trials = Vec::with_capacity(config.trials + config.scan.greedy_steps);
    let mut best: Option<(usize, f64, Base, Perturbation)> = None;
    for (t, r) in restarts.into_iter().enumerate() {
        let Some((trial, base, d)) = r else { continue };
        if best.as_ref().map_or(true, |b| trial.normalized_ratio > b.1) {
            best = Some((t, trial.normalized_ratio, base, d));
        }
        trials.push(trial);
    }
    let Some((t_best, mut score, base, mut d)) = best else {
        return Ok((trials, skipped));
    };
    let prep = &preps[t_best % preps.len()];
    let greedy_seed = split_seed(trial_seed(config, c, t_best), 1 << 32);
    for step in 0..config.scan.greedy_steps {
        let seed = split_seed(greedy_seed, step as u64);
        let candidate = Perturbation {
            da: d
                .da
                .as_ref()
                .map(|x| cell.nudge(x, split_seed(seed, 0)))
                .transpose()?,
            db: d
                .db
                .as_ref()
                .map(|x| cell.nudge(x, split_seed(seed, 1)))
                .transpose()?,
        };
        let (diff, pert) = cell.measure(&prep.f, &base, &candidate)?;
        if pert == 0.0 {
            continue;
        }
        let trial = cell.trial(prep, config.trials + step, seed, diff, pert, true);
        if trial.normalized_ratio > score {
            score = trial.normalized_ratio;
            d = candidate;
        }
        trials.push(trial);
    }
    Ok((trials, skipped))
}

impl Cell<'_> {
    /// `D + G` rescaled back to `‖D‖ₚ`, with `‖G‖ₚ = step · ‖D‖ₚ`.
    fn nudge(&self, d: &HermitianMatrix, seed: u64) -> Result<HermitianMatrix> {
        let norm = schatten_norm(d.as_matrix(), self.p)?;
        let g = prescribed_perturbation(d, self.p, self.config.scan.step * norm, seed)?.difference;
        let moved = d.add(&g);
        let new_norm = schatten_norm(moved.as_matrix(), self.p)?;
        if new_norm == 0.0 {
            return Ok(d.clone());
        }
        HermitianMatrix::new(moved.as_matrix().map(|z| z * (norm / new_norm)))
    }
}

fn assemble(config: &ExperimentConfig, mode: Mode, outcomes: Vec<CellOutcome>) -> ExperimentReport {
    let layout = cells(config);
    let mut summary = Vec::with_capacity(layout.len());
    let mut trials = Vec::new();
    let mut skipped = 0;
    for ((_, p, dim), (cell_trials, cell_skipped)) in layout.iter().zip(outcomes) {
        summary.push(DimSummary {
            p: *p,
            dim: *dim,
            trials: cell_trials.len(),
            skipped: cell_skipped,
            max_ratio: max_of(cell_trials.iter().map(|t| t.ratio)),
            max_normalized_ratio: max_of(cell_trials.iter().map(|t| t.normalized_ratio)),
        });
        skipped += cell_skipped;
        trials.extend(cell_trials);
    }
    let trends = config
        .p
        .values()
        .iter()
        .map(|p| trend(*p, &summary))
        .collect();
    ExperimentReport {
        mode,
        seed: config.seed,
        config: config.clone(),
        normalizer: config.normalizer,
        empirical_constant: max_of(trials.iter().map(|t| t.normalized_ratio)),
        trials,
        skipped,
        summary,
        trends,
    }
}

fn trend(p: SchattenIndex, summary: &[DimSummary]) -> TrendSummary {
    let mut rows: Vec<(usize, f64)> = summary
        .iter()
        .filter(|s| s.p == p)
        .map(|s| (s.dim, s.max_normalized_ratio))
        .collect();
    rows.sort_by_key(|r| r.0);
    let positive: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.1 > 0.0)
        .map(|&(d, m)| ((d as f64).ln(), m.ln()))
        .collect();
    let log_log_slope = if positive.len() >= 2 {
        let n = positive.len() as f64;
        let mx = positive.iter().map(|r| r.0).sum::<f64>() / n;
        let my = positive.iter().map(|r| r.1).sum::<f64>() / n;
        let sxy: f64 = positive.iter().map(|r| (r.0 - mx) * (r.1 - my)).sum();
        let sxx: f64 = positive.iter().map(|r| (r.0 - mx).powi(2)).sum();
        if sxx > 0.0 {
            sxy / sxx
        } else {
            0.0
        }
    } else {
        0.0
    };
    let maxima: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let hi = max_of(maxima.iter().copied());
    let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if lo > 0.0 {
        hi / lo
    } else if hi > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    TrendSummary {
        p,
        dims: rows.iter().map(|r| r.0).collect(),
        max_normalized_ratio: maxima,
        log_log_slope,
        spread,
        grows: log_log_slope > GROWTH_SLOPE,
    }
}
