//! Closed-form stationary statistics of the bulk angular velocity.
//!
//! With a uniform damping-to-inertia ratio γ the bulk angular velocity is an
//! Ornstein–Uhlenbeck process driven by the aggregated node noise, so its
//! stationary width and autocorrelation follow in closed form.
//!
//! Two conventions exist for the stable scale prediction. [`ScaleConvention::Published`]
//! evaluates the published formula
//! `σ̄_S = [Σ σ_{S,i}^α / (γα)]^{1/α} / (√2 ΣM)` literally. Under the noise
//! convention of [`crate::noise`] the stationary scale actually realized by
//! the dynamics is `√2` times larger ([`ScaleConvention::Consistent`]); at α = 2
//! only the consistent form reproduces `std/√2`. The published form is
//! always exactly half of the standard-deviation prediction at α = 2
//! ([`STD_TO_PUBLISHED_SCALE_RATIO`]).

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

// unused when another crate in the graph links std
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::grid::{GridError, GridSpec, ScenarioId, ControlRule};
use crate::noise::{NoiseError, NoiseSpec};
use crate::Fnv64;

/// `predict_std / predict_stable_scale(Published)` at α = 2, for every grid and noise.
pub const STD_TO_PUBLISHED_SCALE_RATIO: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictionError {
    #[error("standard-deviation prediction requires Gaussian noise (α = 2), got α = {0}")]
    NotGaussian(f64),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("damping ratio must be positive, got {0}")]
    BadGamma(f64),
    #[error("lag must be non-negative, got {0}")]
    NegativeLag(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum WidthKind {
    Std,
    StableScale,
}

impl WidthKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WidthKind::Std => "std",
            WidthKind::StableScale => "stable_scale",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScaleConvention {
    /// The formula as published, `1/(√2 ΣM)` prefactor.
    Published,
    /// Matches the simulated dynamics, `1/ΣM` prefactor.
    #[default]
    Consistent,
}

impl ScaleConvention {
    /// Multiplier applied to the published value.
    pub fn factor(self) -> f64 {
        match self {
            ScaleConvention::Published => 1.0,
            ScaleConvention::Consistent => SQRT_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthPrediction {
    pub kind: WidthKind,
    pub value: f64,
    pub gamma_eff: f64,
    /// Set when per-node damping ratios are not uniform; the formula then only
    /// uses the bulk ratio of sums.
    pub approximate: bool,
    pub inputs_digest: u64,
}

fn digest(grid: &GridSpec, noise: &NoiseSpec) -> u64 {
    let mut h = Fnv64::default();
    h.write_u64(grid.digest());
    h.write_u64(noise.digest());
    h.finish()
}

/// `√(Σ (√2 σ_{S,i})²) / ΣM`, the aggregated Gaussian amplitude of the bulk noise.
pub fn aggregate_gaussian_amplitude(grid: &GridSpec, noise: &NoiseSpec) -> Result<f64, PredictionError> {
    if !noise.is_gaussian() {
        return Err(PredictionError::NotGaussian(noise.effective_alpha()));
    }
    noise.check(grid.n)?;
    let sum_sq: f64 = noise.scale.iter().map(|s| 2.0 * s * s).sum();
    Ok(sum_sq.sqrt() / grid.total_inertia())
}

/// Stationary standard deviation `σ̄^P / √(2 γ_eff)`.
pub fn predict_std(grid: &GridSpec, noise: &NoiseSpec) -> Result<WidthPrediction, PredictionError> {
    let amp = aggregate_gaussian_amplitude(grid, noise)?;
    let eg = grid.effective_gamma();
    Ok(WidthPrediction {
        kind: WidthKind::Std,
        value: amp / (2.0 * eg.bulk).sqrt(),
        gamma_eff: eg.bulk,
        approximate: !eg.uniform,
        inputs_digest: digest(grid, noise),
    })
}

/// Published stable-scale formula, evaluated literally.
pub fn predict_stable_scale(grid: &GridSpec, noise: &NoiseSpec) -> Result<WidthPrediction, PredictionError> {
    predict_stable_scale_in(grid, noise, ScaleConvention::Published)
}

pub fn predict_stable_scale_in(
    grid: &GridSpec,
    noise: &NoiseSpec,
    convention: ScaleConvention,
) -> Result<WidthPrediction, PredictionError> {
    noise.check(grid.n)?;
    let alpha = noise.effective_alpha();
    let eg = grid.effective_gamma();
    let sum: f64 = noise.scale.iter().map(|s| s.powf(alpha)).sum();
    let published = (sum / (eg.bulk * alpha)).powf(1.0 / alpha) / (SQRT_2 * grid.total_inertia());
    Ok(WidthPrediction {
        kind: WidthKind::StableScale,
        value: published * convention.factor(),
        gamma_eff: eg.bulk,
        approximate: !eg.uniform,
        inputs_digest: digest(grid, noise),
    })
}

/// Node scale recovered from a single-node bulk scale by inverting the published formula.
pub fn invert_published_scale(omega_scale: f64, total_inertia: f64, gamma: f64, alpha: f64) -> f64 {
    SQRT_2 * total_inertia * omega_scale * (gamma * alpha).powf(1.0 / alpha)
}

/// `exp(-γ Δt)` for each lag.
pub fn predict_autocorrelation(gamma_eff: f64, lags: &[f64]) -> Result<Vec<f64>, PredictionError> {
    if !(gamma_eff > 0.0) {
        return Err(PredictionError::BadGamma(gamma_eff));
    }
    lags.iter()
        .map(|&lag| {
            if lag >= 0.0 {
                Ok((-gamma_eff * lag).exp())
            } else {
                Err(PredictionError::NegativeLag(lag))
            }
        })
        .collect()
}

/// Width prediction of `kind` for a concrete grid.
pub fn predict_width(
    grid: &GridSpec,
    noise: &NoiseSpec,
    kind: WidthKind,
    convention: ScaleConvention,
) -> Result<WidthPrediction, PredictionError> {
    match kind {
        WidthKind::Std => predict_std(grid, noise),
        WidthKind::StableScale => predict_stable_scale_in(grid, noise, convention),
    }
}

/// The grid whose bulk statistics the theory uses at sweep value `kappa_c`.
///
/// Generator-only control is modelled as control at every node with half
/// the gain, since only half of the network is controlled.
pub fn prediction_grid(
    scenario: ScenarioId,
    base: &GridSpec,
    kappa_c: f64,
) -> Result<GridSpec, PredictionError> {
    Ok(match scenario {
        ScenarioId::GeneratorOnly => base.with_control(0.5 * kappa_c, ControlRule::AllNodes)?,
        _ => base.with_control(kappa_c, scenario.control_rule())?,
    })
}

/// Prediction per sweep value. `base` is required for [`ScenarioId::Custom`]
/// and otherwise defaults to the scenario's built-in grid.
pub fn prediction_curve(
    scenario: ScenarioId,
    base: Option<&GridSpec>,
    noise: &NoiseSpec,
    kappa_c_grid: &[f64],
    kind: WidthKind,
    convention: ScaleConvention,
) -> Result<Vec<WidthPrediction>, PredictionError> {
    let owned;
    let base = match base {
        Some(g) => g,
        None => {
            owned = scenario.base_grid()?;
            &owned
        }
    };
    kappa_c_grid
        .iter()
        .map(|&kc| predict_width(&prediction_grid(scenario, base, kc)?, noise, kind, convention))
        .collect()
}
