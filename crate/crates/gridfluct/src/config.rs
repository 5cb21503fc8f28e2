//! JSON configuration for sweeps and grid files.

use std::fs;
use std::path::{Path, PathBuf};

use gridfluct_core::estimators::StableMethod;
use gridfluct_core::integrator::{SimConfig, DEFAULT_DT, DEFAULT_SAMPLES};
use gridfluct_core::noise::{NoiseFamily, NoiseSpec};
use gridfluct_core::predictions::{ScaleConvention, WidthKind};
use gridfluct_core::{GridSpec, ScenarioId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_RUNS: usize = 100;
/// Recorded samples span this many relaxation times `1/γ_eff`.
pub const DEFAULT_SPAN: f64 = 200.0;
pub const DEFAULT_KAPPA_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Grid file: 0-based undirected edge list plus per-node parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub inertia: Vec<f64>,
    pub damping: Vec<f64>,
    #[serde(default)]
    pub control_gain: Option<Vec<f64>>,
    pub power: Vec<f64>,
    /// `[i, j, K_ij]`
    pub edges: Vec<(usize, usize, f64)>,
}

impl GridFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        read_json(path)
    }

    pub fn to_grid(&self) -> Result<GridSpec, ConfigError> {
        let n = self.inertia.len();
        let mut g = GridSpec::from_edges(
            self.inertia.clone(),
            self.damping.clone(),
            vec![0.0; n],
            self.power.clone(),
            &self.edges,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(c) = &self.control_gain {
            if c.len() != n {
                return Err(ConfigError::Invalid(format!(
                    "control_gain has {} entries, expected {n}",
                    c.len()
                )));
            }
            g.control_gain = c.clone();
        }
        Ok(g)
    }

    pub fn from_grid(g: &GridSpec) -> Self {
        GridFile {
            inertia: g.inertia.clone(),
            damping: g.damping.clone(),
            control_gain: Some(g.control_gain.clone()),
            power: g.power.clone(),
            edges: g.edges(),
        }
    }
}

/// A single scale for every node, or one per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scale {
    Uniform(f64),
    PerNode(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub family: NoiseFamily,
    #[serde(default = "two")]
    pub alpha: f64,
    pub scale: Scale,
    #[serde(default)]
    pub seed: u64,
}

fn two() -> f64 {
    2.0
}

impl NoiseConfig {
    pub fn to_spec(&self, n: usize) -> NoiseSpec {
        let scale = match &self.scale {
            Scale::Uniform(s) => vec![*s; n],
            Scale::PerNode(v) => v.clone(),
        };
        match self.family {
            NoiseFamily::Gaussian => NoiseSpec::gaussian(scale, self.seed),
            NoiseFamily::Stable => NoiseSpec::stable(self.alpha, scale, self.seed),
        }
    }
}

/// Integration settings. `steps`, `burn_in` and `stride` default to values
/// derived from each sweep point's relaxation rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_span")]
    pub span: f64,
    #[serde(default)]
    pub burn_in: Option<u64>,
    #[serde(default)]
    pub stride: Option<u64>,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_span() -> f64 {
    DEFAULT_SPAN
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            dt: DEFAULT_DT,
            span: DEFAULT_SPAN,
            burn_in: None,
            stride: None,
        }
    }
}

impl SimSettings {
    pub fn sim_config(&self, gamma: f64, samples: usize) -> SimConfig {
        let mut c = SimConfig::for_gamma(gamma, self.dt, samples, self.span);
        if let Some(b) = self.burn_in {
            c.burn_in = b;
        }
        if let Some(s) = self.stride {
            c.stride = s;
        }
        c.steps = c.burn_in + c.stride * samples as u64;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioId,
    /// Grid file for the `custom` scenario, relative to the working directory.
    #[serde(default)]
    pub grid: Option<PathBuf>,
    pub noise: NoiseConfig,
    #[serde(default = "default_kappa")]
    pub kappa_c_grid: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_samples")]
    pub samples_per_run: usize,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Width estimates per run; defaults to `std` for Gaussian noise and
    /// `stable_scale` otherwise.
    #[serde(default)]
    pub kinds: Option<Vec<WidthKind>>,
    #[serde(default = "default_estimator")]
    pub estimator: StableMethod,
    #[serde(default)]
    pub convention: ScaleConvention,
}

fn default_kappa() -> Vec<f64> {
    DEFAULT_KAPPA_GRID.to_vec()
}

fn default_runs() -> usize {
    DEFAULT_RUNS
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_estimator() -> StableMethod {
    StableMethod::Quantile
}

impl ExperimentConfig {
    /// Built-in scenario with uniform noise and defaults elsewhere.
    pub fn for_scenario(scenario: ScenarioId, family: NoiseFamily, alpha: f64, scale: f64, seed: u64) -> Self {
        ExperimentConfig {
            scenario,
            grid: None,
            noise: NoiseConfig {
                family,
                alpha: if family == NoiseFamily::Gaussian { 2.0 } else { alpha },
                scale: Scale::Uniform(scale),
                seed,
            },
            kappa_c_grid: default_kappa(),
            runs: DEFAULT_RUNS,
            samples_per_run: DEFAULT_SAMPLES,
            sim: SimSettings::default(),
            output_dir: default_out(),
            kinds: None,
            estimator: default_estimator(),
            convention: ScaleConvention::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let c: Self = read_json(path)?;
        c.validate()?;
        Ok(c)
    }

    pub fn kinds(&self) -> Vec<WidthKind> {
        match &self.kinds {
            Some(k) => k.clone(),
            None if self.noise.family == NoiseFamily::Gaussian => vec![WidthKind::Std],
            None => vec![WidthKind::StableScale],
        }
    }

    /// The uncontrolled grid the sweep starts from.
    pub fn base_grid(&self) -> Result<GridSpec, ConfigError> {
        match (&self.grid, self.scenario) {
            (Some(p), _) => GridFile::load(p)?.to_grid(),
            (None, ScenarioId::Custom) => Err(ConfigError::Invalid(
                "scenario `custom` requires a `grid` file".into(),
            )),
            (None, s) => s.base_grid().map_err(|e| ConfigError::Invalid(e.to_string())),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.runs < 2 {
            return bad(format!("runs must be at least 2, got {}", self.runs));
        }
        if self.samples_per_run < 2 {
            return bad("samples_per_run must be at least 2".into());
        }
        if self.kappa_c_grid.is_empty() {
            return bad("kappa_c_grid is empty".into());
        }
        if let Some(k) = self.kappa_c_grid.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
            return bad(format!("kappa_c_grid contains invalid value {k}"));
        }
        if self.kappa_c_grid.windows(2).any(|w| w[1] < w[0]) {
            return bad("kappa_c_grid must be sorted".into());
        }
        if !(self.sim.dt > 0.0) || !(self.sim.span > 0.0) {
            return bad("sim.dt and sim.span must be positive".into());
        }
        if self.sim.stride == Some(0) {
            return bad("sim.stride must be at least 1".into());
        }
        let kinds = self.kinds();
        if kinds.is_empty() {
            return bad("kinds is empty".into());
        }
        let gaussian = self.noise.family == NoiseFamily::Gaussian || self.noise.alpha == 2.0;
        if kinds.contains(&WidthKind::Std) && !gaussian {
            return bad("the std estimate is undefined for stable noise with alpha < 2".into());
        }
        let grid = self.base_grid()?;
        let noise = self.noise.to_spec(grid.n);
        noise.check(grid.n).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let violations = grid.validate();
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return bad(format!("grid: {}", list.join("; ")));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, ignoring `output_dir`.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_vec(&c).expect("config serializes");
        crate::output::sha256_hex(&json)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

