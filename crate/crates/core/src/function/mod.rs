//! Scalar functions on ℝ², the bandlimited catalog, divided differences and
//! the `f♯` transform.

mod catalog;

pub use catalog::{CatalogDoc, CatalogSpec, FunctionEntry, ModeDoc};

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::spectral::C64;

pub type Eval2 = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;

/// Default per-axis sample count for sup-norm lower bounds.
pub const SUP_GRID_SAMPLES: usize = 4096;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// One term `coeff · exp(i(a s + b t))` of a trigonometric sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub a: f64,
    pub b: f64,
    pub coeff: C64,
}

impl FourierMode {
    pub fn new(a: f64, b: f64, coeff: C64) -> Self {
        Self { a, b, coeff }
    }

    pub fn radius(&self) -> f64 {
        self.a.hypot(self.b)
    }

    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> C64 {
        self.coeff * C64::from_polar(1.0, self.a * s + self.b * t)
    }
}

/// A function `f(s, t)` with optional analytic partials and, for catalog
/// functions, exact Fourier-mode metadata.
///
/// Catalog constructors keep the modes, so the Fourier support radius `σ`
/// is known exactly. Functions built with [`FunctionR2::from_fn`] carry no
/// modes and no partials unless [`FunctionR2::with_partials`] adds them.
#[derive(Clone)]
pub struct FunctionR2 {
    label: String,
    eval: Eval2,
    partial_x: Option<Eval2>,
    partial_y: Option<Eval2>,
    modes: Option<Arc<[FourierMode]>>,
}

impl fmt::Debug for FunctionR2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionR2")
            .field("label", &self.label)
            .field(
                "has_partials",
                &(self.partial_x.is_some(), self.partial_y.is_some()),
            )
            .field("modes", &self.modes)
            .finish()
    }
}

fn merge_modes(modes: impl IntoIterator<Item = FourierMode>) -> Vec<FourierMode> {
    let mut out: Vec<FourierMode> = Vec::new();
    for m in modes {
        match out.iter_mut().find(|o| o.a == m.a && o.b == m.b) {
            Some(o) => o.coeff += m.coeff,
            None => out.push(m),
        }
    }
    out.retain(|m| m.coeff != C64::new(0.0, 0.0));
    out
}

impl FunctionR2 {
    /// Evaluation-only function without partials or modes.
    pub fn from_fn(
        label: impl Into<String>,
        eval: impl Fn(f64, f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(eval),
            partial_x: None,
            partial_y: None,
            modes: None,
        }
    }

    pub fn with_partials(
        mut self,
        partial_x: impl Fn(f64, f64) -> C64 + Send + Sync + 'static,
        partial_y: impl Fn(f64, f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        self.partial_x = Some(Arc::new(partial_x));
        self.partial_y = Some(Arc::new(partial_y));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Finite trigonometric sum; equal frequencies are merged and zero terms dropped.
    pub fn trig_poly(modes: Vec<FourierMode>) -> Self {
        let modes = merge_modes(modes);
        let label = CatalogSpec::TrigPoly(modes.clone()).to_string();
        Self::from_modes(label, modes)
    }

    pub fn plane_wave(a: f64, b: f64) -> Self {
        let label = CatalogSpec::PlaneWave { a, b }.to_string();
        Self::from_modes(label, vec![FourierMode::new(a, b, ONE)])
    }

    pub fn constant(c: C64) -> Self {
        let label = CatalogSpec::Constant(c).to_string();
        Self::from_modes(label, merge_modes([FourierMode::new(0.0, 0.0, c)]))
    }

    pub fn zero() -> Self {
        Self::trig_poly(Vec::new())
    }

    /// `f(x, y) = x`; not bandlimited, used by identity tests.
    pub fn coordinate_x() -> Self {
        Self::from_fn("x", |x, _| C64::new(x, 0.0))
            .with_partials(|_, _| ONE, |_, _| C64::new(0.0, 0.0))
    }

    /// `f(x, y) = y`.
    pub fn coordinate_y() -> Self {
        Self::from_fn("y", |_, y| C64::new(y, 0.0))
            .with_partials(|_, _| C64::new(0.0, 0.0), |_, _| ONE)
    }

    fn from_modes(label: String, modes: Vec<FourierMode>) -> Self {
        let modes: Arc<[FourierMode]> = modes.into();
        let (m0, m1, m2) = (modes.clone(), modes.clone(), modes.clone());
        Self {
            label,
            eval: Arc::new(move |s, t| m0.iter().map(|m| m.eval(s, t)).sum()),
            partial_x: Some(Arc::new(move |s, t| {
                m1.iter().map(|m| I * m.a * m.eval(s, t)).sum()
            })),
            partial_y: Some(Arc::new(move |s, t| {
                m2.iter().map(|m| I * m.b * m.eval(s, t)).sum()
            })),
            modes: Some(modes),
        }
    }

    /// `f(λs, λt)`; frequencies scale by `λ`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Validation(format!(
                "dilation factor must be positive, got {lambda}"
            )));
        }
        let label = format!("dilate({}, {})", self.label, fmt_num(lambda));
        if let Some(modes) = &self.modes {
            let scaled = modes
                .iter()
                .map(|m| FourierMode::new(m.a * lambda, m.b * lambda, m.coeff))
                .collect();
            return Ok(Self::from_modes(label, scaled));
        }
        let f = self.eval.clone();
        let px = self.partial_x.clone();
        let py = self.partial_y.clone();
        Ok(Self {
            label,
            eval: Arc::new(move |s, t| f(lambda * s, lambda * t)),
            partial_x: px
                .map(|g| Arc::new(move |s, t| g(lambda * s, lambda * t) * lambda) as Eval2),
            partial_y: py
                .map(|g| Arc::new(move |s, t| g(lambda * s, lambda * t) * lambda) as Eval2),
            modes: None,
        })
    }

    pub fn sum(&self, other: &FunctionR2) -> Self {
        let label = format!("sum({}, {})", self.label, other.label);
        if let (Some(a), Some(b)) = (&self.modes, &other.modes) {
            return Self::from_modes(label, merge_modes(a.iter().chain(b.iter()).copied()));
        }
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let partial = |p: &Option<Eval2>, q: &Option<Eval2>| match (p.clone(), q.clone()) {
            (Some(p), Some(q)) => Some(Arc::new(move |s, t| p(s, t) + q(s, t)) as Eval2),
            _ => None,
        };
        Self {
            label,
            eval: Arc::new(move |s, t| f(s, t) + g(s, t)),
            partial_x: partial(&self.partial_x, &other.partial_x),
            partial_y: partial(&self.partial_y, &other.partial_y),
            modes: None,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let label = format!(
            "scale({}, {}, {})",
            self.label,
            fmt_num(c.re),
            fmt_num(c.im)
        );
        if let Some(modes) = &self.modes {
            return Self::from_modes(
                label,
                merge_modes(
                    modes
                        .iter()
                        .map(|m| FourierMode::new(m.a, m.b, m.coeff * c)),
                ),
            );
        }
        let f = self.eval.clone();
        Self {
            label,
            eval: Arc::new(move |s, t| f(s, t) * c),
            partial_x: self
                .partial_x
                .clone()
                .map(|g| Arc::new(move |s, t| g(s, t) * c) as Eval2),
            partial_y: self
                .partial_y
                .clone()
                .map(|g| Arc::new(move |s, t| g(s, t) * c) as Eval2),
            modes: None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> C64 {
        (self.eval)(s, t)
    }

    pub fn partial_x(&self, s: f64, t: f64) -> Option<C64> {
        self.partial_x.as_ref().map(|g| g(s, t))
    }

    pub fn partial_y(&self, s: f64, t: f64) -> Option<C64> {
        self.partial_y.as_ref().map(|g| g(s, t))
    }

    pub fn has_partials(&self) -> bool {
        self.partial_x.is_some() && self.partial_y.is_some()
    }

    pub fn fourier_modes(&self) -> Option<&[FourierMode]> {
        self.modes.as_deref()
    }

    /// `max |ξ_j|` over the modes (0 for the zero function), `None` without mode metadata.
    pub fn support_radius(&self) -> Option<f64> {
        self.modes
            .as_ref()
            .map(|m| m.iter().map(FourierMode::radius).fold(0.0, f64::max))
    }

    /// Bracket for `‖f‖_{L∞}` of a catalog function: `[grid max, Σ|c_j|]`.
    ///
    /// The grid has `samples²` points on one period box
    /// `[0, 2π/ω_x) × [0, 2π/ω_y)`, where `ω_x`, `ω_y` are the smallest
    /// nonzero frequency magnitudes along each axis. Single-mode functions
    /// are exact.
    pub fn sup_norm_bounds(&self, samples: usize) -> Result<Interval> {
        let modes = self.modes.as_ref().ok_or_else(|| {
            Error::Capability(format!(
                "{} carries no Fourier modes; sup-norm bounds need them",
                self.label
            ))
        })?;
        Ok(sup_norm_of_modes(modes, samples))
    }
}

pub fn sup_norm_of_modes(modes: &[FourierMode], samples: usize) -> Interval {
    let upper: f64 = modes.iter().map(|m| m.coeff.norm()).sum();
    match modes.len() {
        0 => return Interval::ZERO,
        1 => return Interval::point(upper),
        _ => {}
    }
    let min_freq = |sel: fn(&FourierMode) -> f64| {
        modes
            .iter()
            .map(|m| sel(m).abs())
            .filter(|&w| w > 0.0)
            .fold(f64::INFINITY, f64::min)
    };
    let axis = |w: f64| -> Vec<f64> {
        if w.is_finite() {
            let step = 2.0 * std::f64::consts::PI / w / samples as f64;
            (0..samples).map(|i| i as f64 * step).collect()
        } else {
            vec![0.0]
        }
    };
    let xs = axis(min_freq(|m| m.a));
    let ys = axis(min_freq(|m| m.b));
    // f(s,t) = Σ_j (c_j e^{i b_j t}) e^{i a_j s}: precompute the s-factors once
    let xfac: Vec<Vec<C64>> = modes
        .iter()
        .map(|m| xs.iter().map(|&s| C64::from_polar(1.0, m.a * s)).collect())
        .collect();
    let lower = ys
        .par_iter()
        .map(|&t| {
            let w: Vec<C64> = modes
                .iter()
                .map(|m| m.coeff * C64::from_polar(1.0, m.b * t))
                .collect();
            let mut best = 0.0_f64;
            for i in 0..xs.len() {
                let mut acc = C64::new(0.0, 0.0);
                for (j, wj) in w.iter().enumerate() {
                    acc += wj * xfac[j][i];
                }
                best = best.max(acc.norm());
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Interval::new(lower.min(upper), upper)
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// Which slot a divided difference acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DividedDifferenceKind {
    First,
    Second,
}

fn missing_partial(f: &FunctionR2, slot: &str) -> Error {
    Error::Capability(format!(
        "{} needs ∂f/∂{slot} at a coincident point but none is available; construct the function with analytic partials",
        f.label()
    ))
}

/// `(f(x1, y) − f(x2, y)) / (x1 − x2)`, or `∂f/∂x(x1, y)` when `x1 == x2` exactly.
pub fn divided_difference_first(f: &FunctionR2, x1: f64, x2: f64, y: f64) -> Result<C64> {
    if x1 == x2 {
        return f
            .partial_x(0.5 * (x1 + x2), y)
            .ok_or_else(|| missing_partial(f, "x"));
    }
    Ok((f.eval(x1, y) - f.eval(x2, y)) / (x1 - x2))
}

/// `(f(x, y1) − f(x, y2)) / (y1 − y2)`, or `∂f/∂y(x, y1)` when `y1 == y2` exactly.
pub fn divided_difference_second(f: &FunctionR2, x: f64, y1: f64, y2: f64) -> Result<C64> {
    if y1 == y2 {
        return f
            .partial_y(x, 0.5 * (y1 + y2))
            .ok_or_else(|| missing_partial(f, "y"));
    }
    Ok((f.eval(x, y1) - f.eval(x, y2)) / (y1 - y2))
}

/// A divided difference of `f` viewed as a function of three variables.
#[derive(Clone, Debug)]
pub struct DividedDifference {
    pub f: FunctionR2,
    pub kind: DividedDifferenceKind,
}

impl DividedDifference {
    pub fn first(f: &FunctionR2) -> Self {
        Self {
            f: f.clone(),
            kind: DividedDifferenceKind::First,
        }
    }

    pub fn second(f: &FunctionR2) -> Self {
        Self {
            f: f.clone(),
            kind: DividedDifferenceKind::Second,
        }
    }

    pub fn eval(&self, u: f64, v: f64, w: f64) -> Result<C64> {
        match self.kind {
            DividedDifferenceKind::First => divided_difference_first(&self.f, u, v, w),
            DividedDifferenceKind::Second => divided_difference_second(&self.f, u, v, w),
        }
    }
}

/// `f♯(s, t) = f(s, t) / (1 − i t)`.
///
/// Partials follow the quotient rule; mode metadata is dropped since the
/// quotient is no longer bandlimited.
pub fn f_sharp(f: &FunctionR2) -> FunctionR2 {
    let weight = |t: f64| ONE / C64::new(1.0, -t);
    let g = f.eval.clone();
    let mut out = FunctionR2::from_fn(format!("sharp({})", f.label), move |s, t| {
        g(s, t) * weight(t)
    });
    if let (Some(px), Some(py)) = (f.partial_x.clone(), f.partial_y.clone()) {
        let g = f.eval.clone();
        out = out.with_partials(
            move |s, t| px(s, t) * weight(t),
            move |s, t| {
                let w = weight(t);
                py(s, t) * w + I * g(s, t) * w * w
            },
        );
    }
    out
}
