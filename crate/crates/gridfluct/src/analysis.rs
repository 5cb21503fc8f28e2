//! Statistics of a frequency recording and the node-power distribution it implies.

use std::f64::consts::PI;

use gridfluct_core::cf::{self, CharFn, ExtractOptions, ExtractionError, PowerExtraction};
use gridfluct_core::estimators::{self, EstimatorError, StableFit, StableMethod};
use gridfluct_core::{Density, Moments};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::recording::FrequencyRecording;

/// Minimum recording length for analysis.
pub const MIN_SAMPLES: usize = 10_000;
pub const HISTOGRAM_BINS: usize = 101;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("recording too short: need {MIN_SAMPLES} samples, got {0}")]
    TooShort(usize),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
    #[error(transparent)]
    Cf(#[from] cf::CfError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Largest ACF lag in seconds; defaults to a tenth of the recording, at most 600 s.
    pub max_lag: Option<f64>,
    /// Overrides the fitted relaxation rate in the extraction.
    pub gamma: Option<f64>,
    pub method: StableMethod,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            max_lag: None,
            gamma: None,
            method: StableMethod::Ecf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub std: f64,
    pub kurtosis: f64,
    pub n: usize,
}

impl From<Moments> for MomentSummary {
    fn from(m: Moments) -> Self {
        MomentSummary {
            mean: m.mean,
            std: m.std,
            kurtosis: m.kurtosis,
            n: m.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSummary {
    pub gamma: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub lags_used: usize,
    pub max_lag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionSummary {
    pub gamma: f64,
    pub sigma_omega: f64,
    pub sigma_power: f64,
    pub sigma_power_closed_form: f64,
    pub alpha: f64,
    pub omega_scale: f64,
    pub power_scale: f64,
    pub power_scale_closed_form: f64,
    pub k_switch: f64,
    pub ringing: bool,
}

impl From<&PowerExtraction> for ExtractionSummary {
    fn from(e: &PowerExtraction) -> Self {
        ExtractionSummary {
            gamma: e.gamma,
            sigma_omega: e.gaussian.sigma_omega,
            sigma_power: e.gaussian.sigma_power,
            sigma_power_closed_form: e.gaussian.sigma_power_closed_form,
            alpha: e.stable.alpha,
            omega_scale: e.stable.omega_scale,
            power_scale: e.stable.power_scale,
            power_scale_closed_form: e.stable.power_scale_closed_form,
            k_switch: e.k_switch,
            ringing: e.gaussian.density.ringing || e.stable.density.ringing || e.empirical.ringing,
        }
    }
}

/// Serializable part of an analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub samples: usize,
    pub cadence: f64,
    pub f_ref: f64,
    pub gaps: usize,
    pub moments: MomentSummary,
    pub autocorrelation: GammaSummary,
    pub stable_fit: StableFit,
    pub extraction: ExtractionSummary,
}

/// Tabulated curve for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: &'static str,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub report: AnalysisReport,
    pub extraction: PowerExtraction,
    pub curves: Vec<Curve>,
}

fn curve_from_density(name: &'static str, d: &Density) -> Curve {
    Curve {
        name,
        x: d.x.clone(),
        y: d.pdf.clone(),
    }
}

/// Normalized histogram over the 0.1–99.9 % quantile range.
fn histogram(series: &[f64]) -> Curve {
    let mut sorted = series.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let lo = estimators::quantile_sorted(&sorted, 0.001);
    let hi = estimators::quantile_sorted(&sorted, 0.999);
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for &v in series {
        if v >= lo && v < hi {
            counts[(((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1)] += 1;
        }
    }
    let norm = series.len() as f64 * width;
    Curve {
        name: "omega_histogram",
        x: (0..HISTOGRAM_BINS).map(|i| lo + (i as f64 + 0.5) * width).collect(),
        y: counts.iter().map(|&c| c as f64 / norm).collect(),
    }
}

fn stable_density(fit: &StableFit, x: &[f64]) -> Result<Density, cf::CfError> {
    let k_max = 1.05 * 14f64.powf(1.0 / fit.alpha) / fit.scale;
    let k = cf::symmetric_grid(k_max, cf::DEFAULT_HALF_POINTS);
    let law = CharFn::from_log_fn(k, |kk| Complex64::new(fit.symmetric_log_cf(kk), kk * fit.location))?;
    cf::pdf_from_cf(&law, x)
}

pub fn analyze_recording(rec: &FrequencyRecording, options: &AnalysisOptions) -> Result<Analysis, AnalysisError> {
    let omega = &rec.omega;
    if omega.len() < MIN_SAMPLES {
        return Err(AnalysisError::TooShort(omega.len()));
    }
    let moments = estimators::moments(omega)?;
    let span = omega.len() as f64 * rec.cadence;
    let max_lag = options.max_lag.unwrap_or((span / 10.0).min(600.0));
    let acf = estimators::autocorrelation(omega, rec.cadence, max_lag)?;
    let gamma_fit = estimators::fit_gamma(&acf)?;
    let gamma = options.gamma.unwrap_or(gamma_fit.gamma);

    let extraction = cf::extract_power_distribution(
        omega,
        gamma,
        &ExtractOptions {
            method: options.method,
            ..ExtractOptions::default()
        },
    )?;
    let fit = extraction.omega_fit;

    let hist = histogram(omega);
    let gauss = Curve {
        name: "omega_gaussian",
        x: hist.x.clone(),
        y: hist
            .x
            .iter()
            .map(|x| {
                let z = (x - moments.mean) / moments.std;
                (-0.5 * z * z).exp() / (moments.std * (2.0 * PI).sqrt())
            })
            .collect(),
    };
    let stable = stable_density(&fit, &hist.x)?;
    let curves = vec![
        Curve {
            name: "acf",
            x: acf.lags.clone(),
            y: acf.values.clone(),
        },
        Curve {
            name: "acf_fit",
            x: acf.lags.clone(),
            y: acf
                .lags
                .iter()
                .map(|t| (gamma_fit.intercept - gamma_fit.gamma * t).exp())
                .collect(),
        },
        gauss,
        curve_from_density("omega_stable", &stable),
        hist,
        curve_from_density("power_gaussian", &extraction.gaussian.density),
        curve_from_density("power_stable", &extraction.stable.density),
        curve_from_density("power_empirical", &extraction.empirical),
    ];

    let report = AnalysisReport {
        samples: omega.len(),
        cadence: rec.cadence,
        f_ref: rec.f_ref,
        gaps: rec.gaps.len(),
        moments: moments.into(),
        autocorrelation: GammaSummary {
            gamma: gamma_fit.gamma,
            intercept: gamma_fit.intercept,
            r_squared: gamma_fit.r_squared,
            lags_used: gamma_fit.lags_used,
            max_lag,
        },
        stable_fit: fit,
        extraction: ExtractionSummary::from(&extraction),
    };
    Ok(Analysis {
        report,
        extraction,
        curves,
    })
}
