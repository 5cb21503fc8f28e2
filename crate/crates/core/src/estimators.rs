//! Statistics extracted from angular-velocity series: autocorrelation and
//! its exponential decay rate, moments, and symmetric stable-law fits.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// unused when another crate in the graph links std
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::cf::{CfError, CharFn};
use crate::fft;

/// Autocorrelation values at or below this are excluded from the γ fit.
pub const GAMMA_FIT_FLOOR: f64 = 0.1;
/// Minimum number of lags in the γ fit window.
pub const GAMMA_FIT_MIN_LAGS: usize = 5;
/// Minimum series length for stable fits.
pub const STABLE_FIT_MIN_LEN: usize = 500;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("series too short: need {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("series contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("only {0} usable lags above the fit floor, need at least {GAMMA_FIT_MIN_LAGS}")]
    TooFewLags(usize),
    #[error("autocorrelation does not decay (fitted rate {0})")]
    NoDecay(f64),
    #[error("stable fit diverged: {0}")]
    FitDivergence(&'static str),
    #[error("invalid argument: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Cf(#[from] CfError),
}

fn check_finite(series: &[f64]) -> Result<(), EstimatorError> {
    match series.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(EstimatorError::NonFinite(i)),
        None => Ok(()),
    }
}

fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

// ---------------------------------------------------------------------------
// autocorrelation

#[derive(Debug, Clone, PartialEq)]
pub struct AcfCurve {
    /// Lags in seconds, starting at 0.
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    /// Number of products entering each lag.
    pub n_samples: Vec<usize>,
}

/// Biased (1/N) sample autocorrelation of the mean-removed series up to `max_lag` seconds.
pub fn autocorrelation(series: &[f64], dt: f64, max_lag: f64) -> Result<AcfCurve, EstimatorError> {
    if !(dt > 0.0) || !(max_lag >= 0.0) {
        return Err(EstimatorError::Invalid("dt must be positive and max_lag non-negative"));
    }
    check_finite(series)?;
    let lags = (max_lag / dt + 1e-9).floor() as usize;
    let n = series.len();
    if n <= 2 * lags || n < 2 {
        return Err(EstimatorError::TooShort {
            needed: 2 * lags + 1,
            got: n,
        });
    }
    let m = mean(series);
    let centered: Vec<f64> = series.iter().map(|x| x - m).collect();
    let sums = fft::lagged_products(&centered, lags);
    let c0 = sums[0];
    if !(c0 > 0.0) {
        return Err(EstimatorError::ZeroVariance);
    }
    let mut values: Vec<f64> = sums.iter().map(|s| s / c0).collect();
    values[0] = 1.0;
    Ok(AcfCurve {
        lags: (0..=lags).map(|k| k as f64 * dt).collect(),
        values,
        n_samples: (0..=lags).map(|k| n - k).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit {
    pub gamma: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub lags_used: usize,
}

/// Exponential decay rate from a least-squares line through `ln c(Δt)`.
///
/// The window is the contiguous run of positive lags with `c > 0.1`.
pub fn fit_gamma(acf: &AcfCurve) -> Result<GammaFit, EstimatorError> {
    let pts: Vec<(f64, f64)> = acf
        .lags
        .iter()
        .zip(&acf.values)
        .skip(1)
        .take_while(|(_, c)| **c > GAMMA_FIT_FLOOR)
        .map(|(t, c)| (*t, c.ln()))
        .collect();
    if pts.len() < GAMMA_FIT_MIN_LAGS {
        return Err(EstimatorError::TooFewLags(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let gamma = -slope;
    if !(gamma > 1e-12) {
        return Err(EstimatorError::NoDecay(gamma));
    }
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(GammaFit {
        gamma,
        intercept: my - slope * mx,
        r_squared,
        lags_used: pts.len(),
    })
}

// ---------------------------------------------------------------------------
// moments

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Sample standard deviation with n−1 normalization.
    pub std: f64,
    /// Raw kurtosis `m4 / m2²` (3 for a Gaussian).
    pub kurtosis: f64,
    pub n: usize,
}

pub fn moments(series: &[f64]) -> Result<Moments, EstimatorError> {
    if series.len() < 4 {
        return Err(EstimatorError::TooShort {
            needed: 4,
            got: series.len(),
        });
    }
    check_finite(series)?;
    let n = series.len() as f64;
    let m = mean(series);
    let (mut m2, mut m4) = (0.0, 0.0);
    for x in series {
        let d = (x - m) * (x - m);
        m2 += d;
        m4 += d * d;
    }
    if !(m2 > 0.0) {
        return Err(EstimatorError::ZeroVariance);
    }
    let std = (m2 / (n - 1.0)).sqrt();
    let (m2, m4) = (m2 / n, m4 / n);
    Ok(Moments {
        mean: m,
        std,
        kurtosis: m4 / (m2 * m2),
        n: series.len(),
    })
}

// ---------------------------------------------------------------------------
// stable fits

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum StableMethod {
    /// McCulloch's quantile estimator.
    Quantile,
    /// Regression on the empirical characteristic function, started from the quantile fit.
    Ecf,
}

/// Fitted stable law. `scale` follows the `exp(-|c k|^α)` convention and
/// `location` is the S0 (continuous in α) location parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StableFit {
    pub alpha: f64,
    pub beta: f64,
    pub scale: f64,
    pub location: f64,
    pub method: StableMethod,
    pub n: usize,
}

impl StableFit {
    /// Log-characteristic function of the symmetric part, `-(c|k|)^α`.
    pub fn symmetric_log_cf(&self, k: f64) -> f64 {
        -(self.scale * k.abs()).powf(self.alpha)
    }
}

// McCulloch (1986) tables, as distributed with SciPy's levy_stable fit start.
const NU_ALPHA: [f64; 15] = [
    2.439, 2.5, 2.6, 2.7, 2.8, 3.0, 3.2, 3.5, 4.0, 5.0, 6.0, 8.0, 10.0, 15.0, 25.0,
];
const NU_BETA: [f64; 7] = [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0];

// rows: NU_ALPHA, columns: NU_BETA
const PSI1_ALPHA: [[f64; 7]; 15] = [
    [2.000, 2.000, 2.000, 2.000, 2.000, 2.000, 2.000],
    [1.916, 1.924, 1.924, 1.924, 1.924, 1.924, 1.924],
    [1.808, 1.813, 1.829, 1.829, 1.829, 1.829, 1.829],
    [1.729, 1.730, 1.737, 1.745, 1.745, 1.745, 1.745],
    [1.664, 1.663, 1.663, 1.668, 1.676, 1.676, 1.676],
    [1.563, 1.560, 1.553, 1.548, 1.547, 1.547, 1.547],
    [1.484, 1.480, 1.471, 1.460, 1.448, 1.438, 1.438],
    [1.391, 1.386, 1.378, 1.364, 1.337, 1.318, 1.318],
    [1.279, 1.273, 1.266, 1.250, 1.210, 1.184, 1.150],
    [1.128, 1.121, 1.114, 1.101, 1.067, 1.027, 0.973],
    [1.029, 1.021, 1.014, 1.004, 0.974, 0.935, 0.874],
    [0.896, 0.892, 0.884, 0.883, 0.855, 0.823, 0.769],
    [0.818, 0.812, 0.806, 0.801, 0.780, 0.756, 0.691],
    [0.698, 0.695, 0.692, 0.689, 0.676, 0.656, 0.597],
    [0.593, 0.590, 0.588, 0.586, 0.579, 0.563, 0.513],
];

const PSI2_BETA: [[f64; 7]; 15] = [
    [0.0, 2.160, 1.000, 1.000, 1.000, 1.000, 1.000],
    [0.0, 1.592, 3.390, 1.000, 1.000, 1.000, 1.000],
    [0.0, 0.759, 1.800, 1.000, 1.000, 1.000, 1.000],
    [0.0, 0.482, 1.048, 1.694, 1.000, 1.000, 1.000],
    [0.0, 0.360, 0.760, 1.232, 2.229, 1.000, 1.000],
    [0.0, 0.253, 0.518, 0.823, 1.575, 1.000, 1.000],
    [0.0, 0.203, 0.410, 0.632, 1.244, 1.906, 1.000],
    [0.0, 0.165, 0.332, 0.499, 0.943, 1.560, 1.000],
    [0.0, 0.136, 0.271, 0.404, 0.689, 1.230, 2.195],
    [0.0, 0.109, 0.216, 0.323, 0.539, 0.827, 1.917],
    [0.0, 0.096, 0.190, 0.284, 0.472, 0.693, 1.759],
    [0.0, 0.082, 0.163, 0.243, 0.412, 0.601, 1.596],
    [0.0, 0.074, 0.147, 0.220, 0.377, 0.546, 1.482],
    [0.0, 0.064, 0.128, 0.191, 0.330, 0.478, 1.362],
    [0.0, 0.056, 0.112, 0.167, 0.285, 0.428, 1.274],
];

const ALPHA_GRID: [f64; 16] = [
    0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0,
];
const BETA_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

// rows: ALPHA_GRID (ascending), columns: BETA_GRID
const PHI3_NU_C: [[f64; 5]; 16] = [
    [2.588, 3.073, 4.534, 6.636, 9.144],
    [2.337, 2.634, 3.542, 4.808, 6.247],
    [2.189, 2.392, 3.004, 3.844, 4.775],
    [2.098, 2.244, 2.676, 3.265, 3.912],
    [2.040, 2.149, 2.461, 2.886, 3.356],
    [2.000, 2.085, 2.311, 2.624, 2.973],
    [1.980, 2.040, 2.205, 2.435, 2.696],
    [1.965, 2.007, 2.125, 2.294, 2.491],
    [1.955, 1.984, 2.067, 2.188, 2.333],
    [1.946, 1.967, 2.022, 2.106, 2.211],
    [1.939, 1.952, 1.988, 2.045, 2.116],
    [1.933, 1.940, 1.962, 1.997, 2.043],
    [1.927, 1.930, 1.943, 1.961, 1.987],
    [1.921, 1.922, 1.927, 1.936, 1.947],
    [1.914, 1.915, 1.916, 1.918, 1.921],
    [1.908, 1.908, 1.908, 1.908, 1.908],
];

const PHI5_NU_ZETA: [[f64; 5]; 16] = [
    [0.0, -0.061, -0.279, -0.659, -1.198],
    [0.0, -0.078, -0.272, -0.581, -0.997],
    [0.0, -0.089, -0.262, -0.520, -0.853],
    [0.0, -0.096, -0.250, -0.469, -0.742],
    [0.0, -0.099, -0.237, -0.424, -0.652],
    [0.0, -0.098, -0.223, -0.380, -0.576],
    [0.0, -0.095, -0.208, -0.346, -0.508],
    [0.0, -0.090, -0.192, -0.310, -0.447],
    [0.0, -0.084, -0.173, -0.276, -0.390],
    [0.0, -0.075, -0.154, -0.241, -0.335],
    [0.0, -0.066, -0.134, -0.206, -0.283],
    [0.0, -0.056, -0.111, -0.170, -0.232],
    [0.0, -0.043, -0.088, -0.132, -0.179],
    [0.0, -0.030, -0.061, -0.092, -0.123],
    [0.0, -0.017, -0.032, -0.049, -0.064],
    [0.0, 0.000, 0.000, 0.000, 0.000],
];

/// Index `i` and weight `w` with `x ≈ (1-w)·grid[i] + w·grid[i+1]`, clamped to the grid.
fn bracket(grid: &[f64], x: f64) -> (usize, f64) {
    let last = grid.len() - 1;
    if x <= grid[0] {
        return (0, 0.0);
    }
    if x >= grid[last] {
        return (last - 1, 1.0);
    }
    let i = grid.partition_point(|g| *g <= x) - 1;
    let i = i.min(last - 1);
    (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
}

fn bilinear<const C: usize>(table: &[[f64; C]], rows: &[f64], cols: &[f64], r: f64, c: f64) -> f64 {
    let (i, wr) = bracket(rows, r);
    let (j, wc) = bracket(cols, c);
    let a = table[i][j] * (1.0 - wc) + table[i][j + 1] * wc;
    let b = table[i + 1][j] * (1.0 - wc) + table[i + 1][j + 1] * wc;
    a * (1.0 - wr) + b * wr
}

/// Linear-interpolation quantile of sorted data (the "linear" method).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mcculloch(series: &[f64]) -> Result<StableFit, EstimatorError> {
    let mut sorted = series.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let q = |p| quantile_sorted(&sorted, p);
    let (p05, p25, p50, p75, p95) = (q(0.05), q(0.25), q(0.5), q(0.75), q(0.95));
    let iqr = p75 - p25;
    if !(iqr > 0.0) || !(p95 - p05 > 0.0) {
        return Err(EstimatorError::ZeroVariance);
    }
    let nu_alpha = (p95 - p05) / iqr;
    let nu_beta = (p95 + p05 - 2.0 * p50) / (p95 - p05);

    let (alpha, beta) = if nu_alpha >= NU_ALPHA[0] {
        let a = bilinear(&PSI1_ALPHA, &NU_ALPHA, &NU_BETA, nu_alpha, nu_beta.abs());
        let b = bilinear(&PSI2_BETA, &NU_ALPHA, &NU_BETA, nu_alpha, nu_beta.abs());
        (
            a.clamp(f64::EPSILON, 2.0),
            (b * nu_beta.signum()).clamp(-1.0, 1.0),
        )
    } else {
        (2.0, 0.0)
    };
    let beta = if alpha >= 2.0 { 0.0 } else { beta };
    let nu_c = bilinear(&PHI3_NU_C, &ALPHA_GRID, &BETA_GRID, alpha, beta.abs());
    let nu_zeta = bilinear(&PHI5_NU_ZETA, &ALPHA_GRID, &BETA_GRID, alpha, beta.abs()) * beta.signum();
    let scale = iqr / nu_c;
    let location = p50 + scale * if beta == 0.0 { 0.0 } else { nu_zeta };
    Ok(StableFit {
        alpha,
        beta,
        scale,
        location,
        method: StableMethod::Quantile,
        n: series.len(),
    })
}

// Wavenumbers (in units of the inverse starting scale) for the regression.
const ECF_T: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
const ECF_ITERATIONS: usize = 3;

fn ecf_at(standardized: &[f64], t: f64) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for x in standardized {
        let (s, c) = (t * x).sin_cos();
        re += c;
        im += s;
    }
    let n = standardized.len() as f64;
    Complex64::new(re / n, im / n)
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Refines a starting fit by regressing `ln(-ln|φ(t)|²)` on `ln t` (α and scale)
/// and the phase of `φ(t)` on `t` and `t^α` (location and skewness).
fn ecf_refine(series: &[f64], start: StableFit) -> Result<StableFit, EstimatorError> {
    let mut fit = start;
    fit.method = StableMethod::Ecf;
    for _ in 0..ECF_ITERATIONS {
        let (c0, loc0) = (fit.scale, fit.location);
        let z: Vec<f64> = series.iter().map(|x| (x - loc0) / c0).collect();
        let phis: Vec<Complex64> = ECF_T.iter().map(|&t| ecf_at(&z, t)).collect();

        let mut xs = Vec::with_capacity(ECF_T.len());
        let mut ys = Vec::with_capacity(ECF_T.len());
        for (t, phi) in ECF_T.iter().zip(&phis) {
            let m2 = phi.norm_sqr();
            if m2 > 0.0 && m2 < 1.0 {
                xs.push(t.ln());
                ys.push((-m2.ln()).ln());
            }
        }
        if xs.len() < 3 {
            return Err(EstimatorError::FitDivergence("empirical CF too close to 0 or 1"));
        }
        let (slope, intercept) = line_fit(&xs, &ys);
        let alpha = slope.clamp(0.1, 2.0);
        let rel_scale = ((intercept - 2f64.ln()) / alpha).exp();
        if !rel_scale.is_finite() || rel_scale <= 0.0 {
            return Err(EstimatorError::FitDivergence("non-positive scale"));
        }

        // phase: arg φ(t) = δ t + β (c t)^α tan(πα/2)   (standardized units, S1 form)
        let tan = (PI * alpha / 2.0).tan();
        let args: Vec<f64> = phis.iter().map(|p| p.im.atan2(p.re)).collect();
        let (beta, shift) = if alpha < 1.95 && tan.abs() < 1e3 {
            let f: Vec<f64> = ECF_T
                .iter()
                .map(|t| (rel_scale * t).powf(alpha) * tan)
                .collect();
            // two-regressor least squares without intercept
            let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for ((t, fi), y) in ECF_T.iter().zip(&f).zip(&args) {
                a11 += t * t;
                a12 += t * fi;
                a22 += fi * fi;
                b1 += t * y;
                b2 += fi * y;
            }
            let det = a11 * a22 - a12 * a12;
            if det.abs() > 1e-12 * a11 * a22 {
                let delta = (b1 * a22 - b2 * a12) / det;
                let beta = ((a11 * b2 - a12 * b1) / det).clamp(-1.0, 1.0);
                // back to the S0 location
                (beta, delta + beta * rel_scale * tan)
            } else {
                (0.0, b1 / a11)
            }
        } else {
            let a11: f64 = ECF_T.iter().map(|t| t * t).sum();
            let b1: f64 = ECF_T.iter().zip(&args).map(|(t, y)| t * y).sum();
            (0.0, b1 / a11)
        };

        fit.alpha = alpha;
        fit.beta = if alpha >= 2.0 { 0.0 } else { beta };
        fit.scale = c0 * rel_scale;
        fit.location = loc0 + c0 * shift;
    }
    Ok(fit)
}

/// Fits a stable law to `series` by quantiles or empirical-CF regression.
pub fn fit_stable(series: &[f64], method: StableMethod) -> Result<StableFit, EstimatorError> {
    if series.len() < STABLE_FIT_MIN_LEN {
        return Err(EstimatorError::TooShort {
            needed: STABLE_FIT_MIN_LEN,
            got: series.len(),
        });
    }
    check_finite(series)?;
    let start = mcculloch(series)?;
    match method {
        StableMethod::Quantile => Ok(start),
        StableMethod::Ecf => ecf_refine(series, start),
    }
}

// ---------------------------------------------------------------------------
// empirical characteristic function

/// `(1/N) Σ exp(i k x_j)` on the uniform symmetric grid `k_grid`.
///
/// Positive wavenumbers use the recurrence `e^{i(k+dk)x} = e^{ikx}·e^{i dk x}`;
/// negative ones are conjugates, and `k = 0` is exactly 1.
pub fn empirical_cf(series: &[f64], k_grid: &[f64]) -> Result<CharFn, EstimatorError> {
    if series.is_empty() || k_grid.is_empty() {
        return Err(EstimatorError::TooShort { needed: 1, got: 0 });
    }
    check_finite(series)?;
    let half = crate::cf::check_grid(k_grid)?;
    let positive = ecf_positive(series, k_grid, half, usize::MAX, 0.0).0;
    let mut values = Vec::with_capacity(k_grid.len());
    for j in (1..=half).rev() {
        values.push(positive[j].conj());
    }
    values.extend_from_slice(&positive);
    Ok(CharFn::from_values(k_grid.to_vec(), &values, None)?)
}

/// ECF at `k_grid[half + j]` for `j = 0..`, stopping early once `Re φ` drops
/// below `floor` (or after `limit` points). Returns the values and whether it stopped early.
pub(crate) fn ecf_positive(
    series: &[f64],
    k_grid: &[f64],
    half: usize,
    limit: usize,
    floor: f64,
) -> (Vec<Complex64>, bool) {
    let count = (half + 1).min(limit);
    let dk = if half > 0 { k_grid[half + 1] - k_grid[half] } else { 0.0 };
    let n = series.len() as f64;
    let steps: Vec<Complex64> = series
        .iter()
        .map(|x| {
            let (s, c) = (dk * x).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    let mut current: Vec<Complex64> = alloc::vec![Complex64::new(1.0, 0.0); series.len()];
    let mut out = Vec::with_capacity(count);
    out.push(Complex64::new(1.0, 0.0));
    for j in 1..count {
        // re-anchor periodically to bound recurrence drift
        if j % 256 == 0 {
            let k = k_grid[half + j];
            for (cur, x) in current.iter_mut().zip(series) {
                let (s, c) = (k * x).sin_cos();
                *cur = Complex64::new(c, s);
            }
        } else {
            for (cur, st) in current.iter_mut().zip(&steps) {
                *cur *= st;
            }
        }
        let sum: Complex64 = current.iter().sum();
        let v = sum / n;
        out.push(v);
        if v.re < floor {
            return (out, true);
        }
    }
    (out, false)
}
