use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{CatalogSpec, FunctionEntry};
use crate::spectral::{Ensemble, SchattenIndex};

/// Default minimum eigenvalue gap as a fraction of the ensemble's range.
pub const DEFAULT_RELATIVE_GAP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Identity,
    Lipschitz,
    Scan,
}

/// `{kind, radius, min_gap}`; `min_gap` is absolute and defaults to `1e-4 · range`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_gap: Option<f64>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            kind: "gue".into(),
            radius: None,
            min_gap: None,
        }
    }
}

impl EnsembleConfig {
    pub fn ensemble(&self) -> Result<Ensemble> {
        match self.kind.as_str() {
            "gue" => Ok(Ensemble::Gue),
            "spread-spectrum" | "spread_spectrum" => {
                let radius = self.radius.ok_or_else(|| {
                    Error::Validation("ensemble.radius is required for spread-spectrum".into())
                })?;
                if !(radius > 0.0) {
                    return Err(Error::Validation(format!(
                        "ensemble.radius must be positive, got {radius}"
                    )));
                }
                Ok(Ensemble::SpreadSpectrum { radius })
            }
            other => Err(Error::Validation(format!(
                "ensemble.kind: unknown ensemble '{other}'"
            ))),
        }
    }

    pub fn min_gap(&self) -> Result<f64> {
        let ens = self.ensemble()?;
        let gap = self.min_gap.unwrap_or(DEFAULT_RELATIVE_GAP * ens.range());
        if !(gap >= 0.0) {
            return Err(Error::Validation(format!(
                "ensemble.min_gap must be nonnegative, got {gap}"
            )));
        }
        Ok(gap)
    }
}

/// A single Schatten index or a list of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexList {
    One(SchattenIndex),
    Many(Vec<SchattenIndex>),
}

impl IndexList {
    pub fn values(&self) -> Vec<SchattenIndex> {
        match self {
            IndexList::One(p) => vec![*p],
            IndexList::Many(v) => v.clone(),
        }
    }
}

impl Default for IndexList {
    fn default() -> Self {
        IndexList::One(SchattenIndex::HILBERT_SCHMIDT)
    }
}

/// Which argument(s) get perturbed in Lipschitz trials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perturb {
    #[default]
    Both,
    First,
    Second,
}

/// Quantity that divides each ratio before the maximum is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalizer {
    /// Upper end of the inhomogeneous `B¹_{∞,1}` norm interval.
    #[default]
    Besov,
    /// `σ · Σ|c_j|`, the upper end of `σ‖f‖_∞`.
    SigmaSup,
}

/// Per-trial perturbation size: singular values of order `scale · range / 4`,
/// with `scale` log-uniform in `[scale_min, scale_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            scale_min: 1e-3,
            scale_max: 1e-1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Local moves per (p, dim) after the random restarts.
    pub greedy_steps: usize,
    /// Relative size of each local move.
    pub step: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            greedy_steps: 20,
            step: 0.3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    First,
    Second,
    Full,
}

fn all_checks() -> Vec<CheckKind> {
    vec![CheckKind::First, CheckKind::Second, CheckKind::Full]
}

/// Experiment configuration document (JSON or TOML).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub p: IndexList,
    pub dims: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    pub functions: Vec<FunctionEntry>,
    pub mode: Mode,
    #[serde(default)]
    pub normalizer: Normalizer,
    #[serde(default)]
    pub perturb: Perturb,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default = "all_checks")]
    pub checks: Vec<CheckKind>,
    /// Identity mode only: force exact spectral collisions between `A₁`/`A₂` and `B₁`/`B₂`.
    #[serde(default)]
    pub collide: bool,
    /// Evaluate `f(A, B)` through `f♯(A, B)(I − iB)`.
    #[serde(default)]
    pub sharp: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))
    }

    pub fn function_specs(&self) -> Result<Vec<CatalogSpec>> {
        self.functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.to_spec()
                    .map_err(|e| Error::Validation(format!("functions[{i}]: {e}")))
            })
            .collect()
    }

    /// Checks every field; error messages name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::Validation(
                "dims: at least one dimension is required".into(),
            ));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d == 0) {
            return Err(Error::Validation(format!(
                "dims: dimension must be positive, got {d}"
            )));
        }
        if self.trials == 0 {
            return Err(Error::Validation("trials: must be at least 1".into()));
        }
        if self.functions.is_empty() {
            return Err(Error::Validation(
                "functions: at least one function is required".into(),
            ));
        }
        self.function_specs()?;
        self.ensemble.ensemble()?;
        self.ensemble.min_gap()?;
        let ps = self.p.values();
        if ps.is_empty() {
            return Err(Error::Validation(
                "p: at least one Schatten index is required".into(),
            ));
        }
        let PerturbationConfig {
            scale_min,
            scale_max,
        } = self.perturbation;
        if !(scale_min > 0.0 && scale_max >= scale_min && scale_max.is_finite()) {
            return Err(Error::Validation(format!(
                "perturbation: need 0 < scale_min <= scale_max, got [{scale_min}, {scale_max}]"
            )));
        }
        if !(self.scan.step > 0.0) {
            return Err(Error::Validation("scan.step: must be positive".into()));
        }
        if self.mode == Mode::Identity && self.checks.is_empty() {
            return Err(Error::Validation(
                "checks: at least one identity check is required".into(),
            ));
        }
        Ok(())
    }
}
