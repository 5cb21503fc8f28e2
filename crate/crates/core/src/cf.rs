//! Characteristic functions on uniform wavenumber grids and the transforms
//! between node-power and angular-velocity statistics of a damped bulk.
//!
//! Values are stored as logarithms so that rapidly decaying functions stay
//! representable far beyond the range where `exp` underflows.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
// unused when another crate in the graph links std
#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::estimators::{self, EstimatorError, Moments, StableFit, StableMethod};

/// `pdf_from_cf` refuses to invert functions whose modulus at the grid edge reaches this.
pub const CF_EDGE_TOLERANCE: f64 = 1e-6;
/// Densities dipping below this are flagged as ringing.
pub const RINGING_TOLERANCE: f64 = -1e-4;
/// Default number of grid points on each side of `k = 0`.
pub const DEFAULT_HALF_POINTS: usize = 2048;
/// Minimum series length for `extract_power_distribution`.
pub const EXTRACTION_MIN_LEN: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CfError {
    #[error("wavenumber grid must be uniform, symmetric and of odd length")]
    BadGrid,
    #[error("value count {got} does not match grid length {expected}")]
    Length { expected: usize, got: usize },
    #[error("characteristic function vanishes or is non-finite at index {0}")]
    Zero(usize),
    #[error("value at k = 0 must be 1")]
    NotNormalized,
    #[error("relaxation rate must be positive, got {0}")]
    BadGamma(f64),
    #[error("derivative is not finite at index {0}")]
    NonFiniteDerivative(usize),
    #[error("characteristic function has not decayed at the grid edge (|S| = {0:e})")]
    InsufficientDecay(f64),
    #[error("invalid argument: {0}")]
    Invalid(&'static str),
}

/// Validates a symmetric uniform grid and returns the index of `k = 0`.
pub(crate) fn check_grid(k: &[f64]) -> Result<usize, CfError> {
    if k.len() % 2 == 0 {
        return Err(CfError::BadGrid);
    }
    let half = k.len() / 2;
    if k[half] != 0.0 {
        return Err(CfError::BadGrid);
    }
    if half == 0 {
        return Ok(0);
    }
    let dk = k[half + 1];
    if !(dk > 0.0) || !dk.is_finite() {
        return Err(CfError::BadGrid);
    }
    for j in 1..=half {
        let expected = j as f64 * dk;
        let tol = 1e-9 * expected;
        if (k[half + j] - expected).abs() > tol || (k[half - j] + expected).abs() > tol {
            return Err(CfError::BadGrid);
        }
    }
    Ok(half)
}

/// `2·half + 1` points `j·k_max/half`, `j = -half..=half`.
pub fn symmetric_grid(k_max: f64, half: usize) -> Vec<f64> {
    let dk = k_max / half as f64;
    (0..=2 * half)
        .map(|j| (j as f64 - half as f64) * dk)
        .collect()
}

/// A characteristic function sampled on a symmetric uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFn {
    k: Vec<f64>,
    log_values: Vec<Complex64>,
    half: usize,
    /// Relaxation rate used to produce this function, if it came out of a transform.
    pub gamma: Option<f64>,
}

impl CharFn {
    /// Builds from log-values `ln S(k)`.
    pub fn from_log_values(k: Vec<f64>, log_values: Vec<Complex64>, gamma: Option<f64>) -> Result<Self, CfError> {
        let half = check_grid(&k)?;
        if log_values.len() != k.len() {
            return Err(CfError::Length {
                expected: k.len(),
                got: log_values.len(),
            });
        }
        if let Some(j) = log_values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(CfError::Zero(j));
        }
        if log_values[half].norm() > 1e-12 {
            return Err(CfError::NotNormalized);
        }
        Ok(CharFn {
            k,
            log_values,
            half,
            gamma,
        })
    }

    pub fn from_values(k: Vec<f64>, values: &[Complex64], gamma: Option<f64>) -> Result<Self, CfError> {
        if let Some(j) = values.iter().position(|v| v.norm() == 0.0) {
            return Err(CfError::Zero(j));
        }
        let logs = values.iter().map(|v| v.ln()).collect();
        Self::from_log_values(k, logs, gamma)
    }

    /// Samples `ln S(k) = f(k)` on `k`.
    pub fn from_log_fn(k: Vec<f64>, f: impl Fn(f64) -> Complex64) -> Result<Self, CfError> {
        let logs = k.iter().map(|&kk| f(kk)).collect();
        Self::from_log_values(k, logs, None)
    }

    /// Symmetric stable law `exp(-(c|k|)^α)`.
    pub fn symmetric_stable(k: Vec<f64>, alpha: f64, scale: f64) -> Result<Self, CfError> {
        Self::from_log_fn(k, |kk| Complex64::new(-(scale * kk.abs()).powf(alpha), 0.0))
    }

    /// Zero-mean Gaussian `exp(-σ²k²/2)`.
    pub fn gaussian(k: Vec<f64>, sigma: f64) -> Result<Self, CfError> {
        Self::from_log_fn(k, |kk| Complex64::new(-0.5 * sigma * sigma * kk * kk, 0.0))
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn dk(&self) -> f64 {
        if self.half == 0 {
            0.0
        } else {
            self.k[self.half + 1]
        }
    }

    pub fn k_max(&self) -> f64 {
        self.k[self.k.len() - 1]
    }

    pub fn log_values(&self) -> &[Complex64] {
        &self.log_values
    }

    pub fn log_value(&self, j: usize) -> Complex64 {
        self.log_values[j]
    }

    pub fn value(&self, j: usize) -> Complex64 {
        self.log_values[j].exp()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.log_values.iter().map(|v| v.exp()).collect()
    }

    /// Largest modulus at the two grid ends.
    pub fn edge_modulus(&self) -> f64 {
        let a = self.log_values[0].re;
        let b = self.log_values[self.log_values.len() - 1].re;
        a.max(b).exp()
    }

    /// Linear interpolation of `ln S` at `k` inside the grid.
    pub fn log_at(&self, k: f64) -> Option<Complex64> {
        if self.half == 0 || k.abs() > self.k_max() {
            return None;
        }
        let pos = k / self.dk() + self.half as f64;
        let i = (pos.floor() as usize).min(self.k.len() - 2);
        let w = pos - i as f64;
        Some(self.log_values[i] * (1.0 - w) + self.log_values[i + 1] * w)
    }
}

// ---------------------------------------------------------------------------
// transforms

/// `∫_a^b h(z)/z dz` for one real component, assuming a power law `h ∝ z^p`
/// between the nodes when the values share a sign.
fn power_cell(a: f64, b: f64, ha: f64, hb: f64) -> f64 {
    if ha == hb {
        return ha * (b / a).ln();
    }
    if ha * hb > 0.0 {
        let p = (hb / ha).ln() / (b / a).ln();
        if p.abs() > 1e-9 {
            return (hb - ha) / p;
        }
    }
    0.5 * (ha / a + hb / b) * (b - a)
}

/// `∫_0^dz h(z)/z dz` from a power law through the first two nodes; falls back
/// to the `h(0)/0 → 0` limit in a trapezoid.
fn first_cell(h1: f64, h2: f64, dz: f64) -> f64 {
    if h1 == 0.0 {
        return 0.0;
    }
    if h1 * h2 > 0.0 {
        let p = (h2 / h1).ln() / 2f64.ln();
        if p > 1e-9 {
            return h1 / p;
        }
    }
    0.5 * (h1 / dz) * dz
}

fn cumulative(h: &[Complex64], z: &[f64]) -> Vec<Complex64> {
    // h[0] is at z = 0 and is unused
    let mut out = Vec::with_capacity(h.len());
    out.push(Complex64::new(0.0, 0.0));
    if h.len() < 2 {
        return out;
    }
    let h2 = if h.len() > 2 { h[2] } else { h[1] * 2.0 };
    let mut acc = Complex64::new(
        first_cell(h[1].re, h2.re, z[1]),
        first_cell(h[1].im, h2.im, z[1]),
    );
    out.push(acc);
    for j in 2..h.len() {
        let (a, b) = (z[j - 1], z[j]);
        acc += Complex64::new(
            power_cell(a, b, h[j - 1].re, h[j].re),
            power_cell(a, b, h[j - 1].im, h[j].im),
        );
        out.push(acc);
    }
    out
}

/// Angular-velocity CF from a node-power CF:
/// `ln S^ω(k) = (1/γ) ∫_0^k ln S^P(z) / z dz`.
pub fn omega_cf_from_power_cf(power: &CharFn, gamma: f64) -> Result<CharFn, CfError> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(CfError::BadGamma(gamma));
    }
    let half = power.half;
    let z: Vec<f64> = power.k[half..].to_vec();
    let pos: Vec<Complex64> = power.log_values[half..].to_vec();
    let neg: Vec<Complex64> = (0..=half).map(|j| power.log_values[half - j]).collect();
    let ip = cumulative(&pos, &z);
    let ineg = cumulative(&neg, &z);
    let mut logs = Vec::with_capacity(power.len());
    for j in (1..=half).rev() {
        logs.push(ineg[j] / gamma);
    }
    logs.extend(ip.iter().map(|v| v / gamma));
    CharFn::from_log_values(power.k.clone(), logs, Some(gamma))
}

/// `k·dh/dk` at node `j` of one half-line (`z[0] = 0`), for one real component.
fn log_derivative(h: &[f64], z: &[f64], j: usize) -> f64 {
    let last = h.len() - 1;
    let same = |a: f64, b: f64| a * b > 0.0;
    if j == 0 {
        return 0.0;
    }
    if j == 1 || j == last {
        let (a, b) = if j == 1 { (1, 2.min(last)) } else { (last - 1, last) };
        if a != b && same(h[a], h[b]) && same(h[j], h[a]) {
            let p = (h[b] / h[a]).ln() / (z[b] / z[a]).ln();
            return p * h[j];
        }
        if a == b {
            return 0.0;
        }
        return z[j] * (h[b] - h[a]) / (z[b] - z[a]);
    }
    let (a, b) = (j - 1, j + 1);
    if same(h[a], h[b]) && same(h[a], h[j]) {
        let p = (h[b] / h[a]).ln() / (z[b] / z[a]).ln();
        return p * h[j];
    }
    z[j] * (h[b] - h[a]) / (z[b] - z[a])
}

/// Node-power CF from an angular-velocity CF:
/// `ln S^P(k) = γ k d/dk ln S^ω(k)`.
pub fn power_cf_from_omega_cf(omega: &CharFn, gamma: f64) -> Result<CharFn, CfError> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(CfError::BadGamma(gamma));
    }
    let half = omega.half;
    let z: Vec<f64> = omega.k[half..].to_vec();
    let side = |sign_pos: bool| -> Result<Vec<Complex64>, CfError> {
        let h: Vec<Complex64> = (0..=half)
            .map(|j| omega.log_values[if sign_pos { half + j } else { half - j }])
            .collect();
        let re: Vec<f64> = h.iter().map(|v| v.re).collect();
        let im: Vec<f64> = h.iter().map(|v| v.im).collect();
        (0..=half)
            .map(|j| {
                let d = Complex64::new(log_derivative(&re, &z, j), log_derivative(&im, &z, j)) * gamma;
                if d.re.is_finite() && d.im.is_finite() {
                    Ok(d)
                } else {
                    Err(CfError::NonFiniteDerivative(if sign_pos { half + j } else { half - j }))
                }
            })
            .collect()
    };
    let pos = side(true)?;
    let neg = side(false)?;
    let mut logs = Vec::with_capacity(omega.len());
    for j in (1..=half).rev() {
        logs.push(neg[j]);
    }
    logs.extend(pos);
    CharFn::from_log_values(omega.k.clone(), logs, Some(gamma))
}

/// Power-law scale implied for node power by an ω scale: `c_P = c_ω (γα)^{1/α}`.
pub fn power_scale_from_omega_scale(omega_scale: f64, alpha: f64, gamma: f64) -> f64 {
    omega_scale * (gamma * alpha).powf(1.0 / alpha)
}

// ---------------------------------------------------------------------------
// densities

#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub x: Vec<f64>,
    pub pdf: Vec<f64>,
    /// Most negative density value produced by the inversion.
    pub min_value: f64,
    pub ringing: bool,
}

impl Density {
    /// Trapezoid integral over the (possibly non-uniform) x grid.
    pub fn integral(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.pdf.windows(2))
            .map(|(x, p)| 0.5 * (p[0] + p[1]) * (x[1] - x[0]))
            .sum()
    }
}

/// `p(x) = (1/2π) ∫ S(k) e^{-ikx} dk` by the trapezoid rule over the CF grid.
pub fn pdf_from_cf(cf: &CharFn, x_grid: &[f64]) -> Result<Density, CfError> {
    if cf.half == 0 {
        return Err(CfError::Invalid("grid needs at least three points"));
    }
    if x_grid.iter().any(|x| !x.is_finite()) {
        return Err(CfError::Invalid("non-finite x"));
    }
    let edge = cf.edge_modulus();
    if edge >= CF_EDGE_TOLERANCE {
        return Err(CfError::InsufficientDecay(edge));
    }
    let dk = cf.dk();
    let last = cf.len() - 1;
    // drop nodes that contribute nothing
    let nodes: Vec<(f64, Complex64)> = cf
        .k
        .iter()
        .zip(&cf.log_values)
        .enumerate()
        .filter(|(_, (_, l))| l.re > -745.0)
        .map(|(j, (k, l))| {
            let w = if j == 0 || j == last { 0.5 } else { 1.0 };
            (*k, l.exp() * w)
        })
        .collect();
    let pdf: Vec<f64> = x_grid
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for (k, s) in &nodes {
                let (sn, cs) = (k * x).sin_cos();
                // Re[s·e^{-ikx}]
                acc += s.re * cs + s.im * sn;
            }
            acc * dk / (2.0 * PI)
        })
        .collect();
    let min_value = pdf.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Density {
        x: x_grid.to_vec(),
        pdf,
        min_value,
        ringing: min_value < RINGING_TOLERANCE,
    })
}

/// `n` points on `[-x_max, x_max]` spaced as `sinh`, fine near 0.
pub fn sinh_grid(x_max: f64, n: usize, core_width: f64) -> Vec<f64> {
    let u_max = (x_max / core_width).asinh();
    (0..n)
        .map(|i| {
            let u = -u_max + 2.0 * u_max * i as f64 / (n - 1) as f64;
            core_width * u.sinh()
        })
        .collect()
}

pub fn uniform_grid(x_max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -x_max + 2.0 * x_max * i as f64 / (n - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------------------
// extraction

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    pub half_points: usize,
    pub x_points: usize,
    pub method: StableMethod,
    /// Empirical CF values are used while `Re S ≥ hybrid_factor / √N`.
    pub hybrid_factor: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            half_points: DEFAULT_HALF_POINTS,
            x_points: 801,
            method: StableMethod::Ecf,
            hybrid_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianExtraction {
    pub sigma_omega: f64,
    /// Node-power standard deviation read off the transformed CF.
    pub sigma_power: f64,
    /// `√(2γ)·σ_ω`.
    pub sigma_power_closed_form: f64,
    pub density: Density,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StableExtraction {
    pub alpha: f64,
    pub omega_scale: f64,
    /// Node-power scale read off the transformed CF.
    pub power_scale: f64,
    /// `c_ω (γα)^{1/α}`.
    pub power_scale_closed_form: f64,
    pub density: Density,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerExtraction {
    pub gamma: f64,
    pub moments: Moments,
    pub omega_fit: StableFit,
    pub gaussian: GaussianExtraction,
    pub stable: StableExtraction,
    /// Density from the hybrid empirical/fitted CF.
    pub empirical: Density,
    /// Wavenumber where the empirical CF hands over to the fitted one.
    pub k_switch: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractionError {
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error("relaxation rate must be positive, got {0}")]
    BadGamma(f64),
}

/// Reads `(-ln S)^{1/α} / k` at the grid point where `-ln S` is closest to 1.
fn scale_from_cf(cf: &CharFn, alpha: f64) -> f64 {
    let half = cf.half;
    let mut best = (f64::INFINITY, f64::NAN);
    for j in half + 1..cf.len() {
        let h = -cf.log_values[j].re;
        if h > 0.0 {
            let d = (h.ln()).abs();
            if d < best.0 {
                best = (d, h.powf(1.0 / alpha) / cf.k[j]);
            }
        }
    }
    best.1
}

/// Wavenumber where `(c k)^α` reaches 14 (`S ≈ 8e-7`).
fn decay_k(scale: f64, alpha: f64) -> f64 {
    14f64.powf(1.0 / alpha) / scale
}

/// Node-power distributions implied by a bulk angular-velocity series with relaxation rate `gamma`.
pub fn extract_power_distribution(
    series: &[f64],
    gamma: f64,
    options: &ExtractOptions,
) -> Result<PowerExtraction, ExtractionError> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(ExtractionError::BadGamma(gamma));
    }
    if series.len() < EXTRACTION_MIN_LEN {
        return Err(EstimatorError::TooShort {
            needed: EXTRACTION_MIN_LEN,
            got: series.len(),
        }
        .into());
    }
    let moments = estimators::moments(series)?;
    let fit = estimators::fit_stable(series, options.method)?;
    let sigma_omega = moments.std;
    let sigma_p = (2.0 * gamma).sqrt() * sigma_omega;
    let c_p = power_scale_from_omega_scale(fit.scale, fit.alpha, gamma);

    // one grid on which every power CF has decayed
    let k_max = 1.05 * decay_k(sigma_p / 2f64.sqrt(), 2.0).max(decay_k(c_p, fit.alpha));
    let k = symmetric_grid(k_max, options.half_points);
    let x_max = 20.0 * sigma_p.max(c_p);
    let x = uniform_grid(x_max, options.x_points);

    let gauss_omega = CharFn::gaussian(k.clone(), sigma_omega)?;
    let gauss_power = power_cf_from_omega_cf(&gauss_omega, gamma)?;
    let gaussian = GaussianExtraction {
        sigma_omega,
        sigma_power: scale_from_cf(&gauss_power, 2.0) * 2f64.sqrt(),
        sigma_power_closed_form: sigma_p,
        density: pdf_from_cf(&gauss_power, &x)?,
    };

    let stable_omega = CharFn::symmetric_stable(k.clone(), fit.alpha, fit.scale)?;
    let stable_power = power_cf_from_omega_cf(&stable_omega, gamma)?;
    let stable = StableExtraction {
        alpha: fit.alpha,
        omega_scale: fit.scale,
        power_scale: scale_from_cf(&stable_power, fit.alpha),
        power_scale_closed_form: c_p,
        density: pdf_from_cf(&stable_power, &x)?,
    };

    // hybrid: symmetrized empirical CF of the centred series, fitted law beyond
    let half = options.half_points;
    let floor = options.hybrid_factor / (series.len() as f64).sqrt();
    let centred: Vec<f64> = series.iter().map(|v| v - fit.location).collect();
    let (emp, _) = estimators::ecf_positive(&centred, &k, half, half + 1, floor);
    let mut switch = 1;
    let mut pos = Vec::with_capacity(half + 1);
    pos.push(Complex64::new(0.0, 0.0));
    for (j, v) in emp.iter().enumerate().skip(1) {
        if v.re < floor {
            break;
        }
        pos.push(Complex64::new(v.re.ln(), 0.0));
        switch = j;
    }
    let fitted = |j: usize| fit.symmetric_log_cf(k[half + j]);
    let ratio = if switch >= 1 && fitted(switch) < 0.0 {
        pos[switch].re / fitted(switch)
    } else {
        1.0
    };
    for j in pos.len()..=half {
        pos.push(Complex64::new(fitted(j) * ratio, 0.0));
    }
    let mut logs: Vec<Complex64> = (1..=half).rev().map(|j| pos[j]).collect();
    logs.extend_from_slice(&pos);
    let hybrid_omega = CharFn::from_log_values(k.clone(), logs, None)?;
    let hybrid_power = power_cf_from_omega_cf(&hybrid_omega, gamma)?;
    let empirical = pdf_from_cf(&hybrid_power, &x)?;

    Ok(PowerExtraction {
        gamma,
        moments,
        omega_fit: fit,
        gaussian,
        stable,
        empirical,
        k_switch: k[half + switch],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid(k_max: f64) -> Vec<f64> {
        symmetric_grid(k_max, DEFAULT_HALF_POINTS)
    }

    #[test]
    fn grid_checks() {
        assert_eq!(check_grid(&grid(3.0)), Ok(DEFAULT_HALF_POINTS));
        assert_eq!(check_grid(&[0.0, 1.0]), Err(CfError::BadGrid));
        assert_eq!(check_grid(&[-1.0, 0.0, 2.0]), Err(CfError::BadGrid));
        assert_eq!(check_grid(&[-1.0, 0.1, 1.0]), Err(CfError::BadGrid));
    }

    #[test]
    fn construction_errors() {
        let k = vec![-1.0, 0.0, 1.0];
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(CharFn::from_values(k.clone(), &[one, one, z], None), Err(CfError::Zero(2)));
        assert_eq!(
            CharFn::from_values(k.clone(), &[one, one * 0.5, one], None),
            Err(CfError::NotNormalized)
        );
        assert!(matches!(
            CharFn::from_values(k, &[one], None),
            Err(CfError::Length { .. })
        ));
    }

    #[test]
    fn stable_omega_to_power_scale() {
        // exp(-(0.5k)^1.5) at γ = 0.2 → exp(-0.3 (0.5k)^1.5), scale 0.5·0.3^{2/3}
        let expected = 0.5 * 0.3f64.powf(1.0 / 1.5);
        assert!((expected - 0.224_07).abs() < 1e-5);
        let omega = CharFn::symmetric_stable(grid(20.0), 1.5, 0.5).unwrap();
        let power = power_cf_from_omega_cf(&omega, 0.2).unwrap();
        for j in [2049, 2050, 2100, 2500, 3000, 4095, 4096, 0, 1000] {
            let k = power.k()[j];
            let want = -(expected * k.abs()).powf(1.5);
            let got = power.log_value(j).re;
            assert!((got - want).abs() <= 1e-9 * want.abs(), "k = {k}: {got} vs {want}");
        }
        assert_eq!(power.gamma, Some(0.2));
        assert!((scale_from_cf(&power, 1.5) - expected).abs() < 1e-9);

        let back = omega_cf_from_power_cf(&power, 0.2).unwrap();
        for j in [2049, 2100, 3000, 4096, 7] {
            let (a, b) = (back.log_value(j).re, omega.log_value(j).re);
            assert!((a - b).abs() <= 1e-9 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn gaussian_omega_to_power() {
        let omega = CharFn::gaussian(grid(12.0), 1.0).unwrap();
        let power = power_cf_from_omega_cf(&omega, 0.5).unwrap();
        assert!((scale_from_cf(&power, 2.0) * 2f64.sqrt() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn round_trip_gaussian_and_stable() {
        for (alpha, scale) in [(2.0, 0.7), (1.5, 0.5), (1.2, 1.3)] {
            let power = CharFn::symmetric_stable(grid(30.0), alpha, scale).unwrap();
            let omega = omega_cf_from_power_cf(&power, 0.1).unwrap();
            let back = power_cf_from_omega_cf(&omega, 0.1).unwrap();
            let worst = power
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(worst < 1e-3, "alpha {alpha}: {worst}");
        }
    }

    #[test]
    fn round_trip_non_power_law() {
        // a two-component log CF with a sign change in its imaginary part
        let f = |k: f64| Complex64::new(-0.3 * k * k - 0.2 * k.abs().powf(1.3), 0.2 * k - 0.05 * k * k * k);
        let power = CharFn::from_log_fn(grid(8.0), f).unwrap();
        let omega = omega_cf_from_power_cf(&power, 0.5).unwrap();
        let back = power_cf_from_omega_cf(&omega, 0.5).unwrap();
        for j in (0..power.len()).step_by(37) {
            let (a, b) = (power.value(j), back.value(j));
            assert!((a - b).norm() < 1e-3, "k = {}: {a} vs {b}", power.k()[j]);
        }
    }

    #[test]
    fn bad_gamma() {
        let power = CharFn::gaussian(grid(5.0), 1.0).unwrap();
        assert_eq!(omega_cf_from_power_cf(&power, 0.0), Err(CfError::BadGamma(0.0)));
        assert_eq!(power_cf_from_omega_cf(&power, -1.0), Err(CfError::BadGamma(-1.0)));
    }

    #[test]
    fn gaussian_density() {
        let cf = CharFn::gaussian(grid(10.0), 1.0).unwrap();
        let d = pdf_from_cf(&cf, &uniform_grid(8.0, 801)).unwrap();
        assert!((d.pdf[400] - 0.398_942_280_401_432_7).abs() < 1e-6);
        assert!((d.integral() - 1.0).abs() < 1e-6);
        assert!(!d.ringing);
    }

    #[test]
    fn cauchy_density() {
        // period 2π/dk must be far wider than the x range
        let cf = CharFn::symmetric_stable(symmetric_grid(15.0, 50_000), 1.0, 1.0).unwrap();
        let d = pdf_from_cf(&cf, &sinh_grid(1000.0, 2001, 1.0)).unwrap();
        assert!((d.pdf[1000] - 1.0 / PI).abs() < 1e-3);
        // mass beyond ±1000 is 2/(1000π)
        let expected = 1.0 - 2.0 / (1000.0 * PI);
        assert!((d.integral() - expected).abs() < 1e-3, "{}", d.integral());
    }

    #[test]
    fn undecayed_cf_rejected() {
        let cf = CharFn::gaussian(grid(2.0), 1.0).unwrap();
        assert!(matches!(
            pdf_from_cf(&cf, &[0.0]),
            Err(CfError::InsufficientDecay(_))
        ));
    }

    #[test]
    fn closed_form_scale_relation() {
        assert!((power_scale_from_omega_scale(0.5, 1.5, 0.2) - 0.224_07).abs() < 1e-5);
    }
}
