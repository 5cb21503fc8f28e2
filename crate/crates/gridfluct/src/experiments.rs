//! Ensembles of simulated trajectories over a sweep of control strengths.

use gridfluct_core::estimators::{self, EstimatorError, StableMethod};
use gridfluct_core::integrator::{simulate, SimConfig, Trajectory};
use gridfluct_core::predictions::{self, PredictionError, WidthKind};
use gridfluct_core::{ControlRule, GridSpec, ScenarioId};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};

/// A sweep point is invalid when more than this fraction of runs fail.
pub const MAX_FAILED_FRACTION: f64 = 0.05;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("prediction failed: {0}")]
    Prediction(#[from] PredictionError),
    #[error("grid at kappa_c = {kappa_c}: {message}")]
    Grid { kappa_c: f64, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub kappa_c: f64,
    pub kind: WidthKind,
    pub estimate_mean: f64,
    /// Standard deviation of the per-run estimates.
    pub estimate_spread: f64,
    pub predicted: f64,
    pub gamma_eff: f64,
    pub runs_ok: usize,
    pub runs_failed: usize,
    pub valid: bool,
    /// Per-run estimates in run order (failed runs omitted).
    #[serde(skip)]
    pub estimates: Vec<f64>,
}

impl EnsembleStats {
    /// `|mean − predicted| / spread`.
    pub fn deviation(&self) -> f64 {
        (self.estimate_mean - self.predicted).abs() / self.estimate_spread
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunFailure {
    pub kappa_c: f64,
    pub run: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub scenario: ScenarioId,
    pub config_digest: String,
    pub seed: u64,
    pub stats: Vec<EnsembleStats>,
    pub sim_configs: Vec<(f64, SimConfig)>,
    pub failures: Vec<RunFailure>,
}

impl SweepResult {
    pub fn for_kind(&self, kind: WidthKind) -> impl Iterator<Item = &EnsembleStats> {
        self.stats.iter().filter(move |s| s.kind == kind)
    }
}

/// The simulated grid at sweep value `kappa_c`.
pub fn sweep_grid(scenario: ScenarioId, base: &GridSpec, kappa_c: f64) -> Result<GridSpec, SweepError> {
    let rule = match scenario {
        ScenarioId::GeneratorOnly => ControlRule::GeneratorsOnly,
        _ => ControlRule::AllNodes,
    };
    base.with_control(kappa_c, rule).map_err(|e| SweepError::Grid {
        kappa_c,
        message: e.to_string(),
    })
}

/// One width estimate from a bulk series.
pub fn estimate_width(series: &[f64], kind: WidthKind, method: StableMethod) -> Result<f64, EstimatorError> {
    match kind {
        WidthKind::Std => Ok(estimators::moments(series)?.std),
        WidthKind::StableScale => Ok(estimators::fit_stable(series, method)?.scale),
    }
}

struct Point {
    kappa_c: f64,
    grid: GridSpec,
    sim: SimConfig,
}

fn points(config: &ExperimentConfig, base: &GridSpec) -> Result<Vec<Point>, SweepError> {
    config
        .kappa_c_grid
        .iter()
        .map(|&kappa_c| {
            let grid = sweep_grid(config.scenario, base, kappa_c)?;
            let gamma = grid.effective_gamma().bulk;
            let sim = config.sim.sim_config(gamma, config.samples_per_run);
            Ok(Point { kappa_c, grid, sim })
        })
        .collect()
}

/// Simulates run `run` at sweep value `kappa_c` with node series recorded.
pub fn simulate_run(config: &ExperimentConfig, kappa_c: f64, run: u64) -> Result<Trajectory, SweepError> {
    let base = config.base_grid()?;
    let grid = sweep_grid(config.scenario, &base, kappa_c)?;
    let mut sim = config.sim.sim_config(grid.effective_gamma().bulk, config.samples_per_run);
    sim.record_nodes = true;
    let noise = config.noise.to_spec(grid.n);
    simulate(&grid, &noise, &sim, run).map_err(|e| SweepError::Grid {
        kappa_c,
        message: e.to_string(),
    })
}

fn mean_spread(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs every (sweep point, run) pair in parallel and reduces in a fixed order.
///
/// Run `r` uses the noise streams `(seed, r, node)` at every sweep point.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, SweepError> {
    config.validate()?;
    let base = config.base_grid()?;
    let points = points(config, &base)?;
    let noise = config.noise.to_spec(base.n);
    let kinds = config.kinds();

    let tasks: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| (0..config.runs as u64).map(move |r| (p, r)))
        .collect();
    let outcomes: Vec<Result<Vec<f64>, String>> = tasks
        .par_iter()
        .map(|&(p, run)| {
            let pt = &points[p];
            let traj = simulate(&pt.grid, &noise, &pt.sim, run).map_err(|e| e.to_string())?;
            kinds
                .iter()
                .map(|&k| estimate_width(&traj.bulk_omega, k, config.estimator).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();

    let mut stats = Vec::new();
    let mut failures = Vec::new();
    for (p, pt) in points.iter().enumerate() {
        let chunk = &outcomes[p * config.runs..(p + 1) * config.runs];
        let mut per_kind: Vec<Vec<f64>> = vec![Vec::new(); kinds.len()];
        let mut failed = 0;
        for (run, outcome) in chunk.iter().enumerate() {
            match outcome {
                Ok(values) => {
                    for (slot, v) in per_kind.iter_mut().zip(values) {
                        slot.push(*v);
                    }
                }
                Err(message) => {
                    failed += 1;
                    failures.push(RunFailure {
                        kappa_c: pt.kappa_c,
                        run: run as u64,
                        message: message.clone(),
                    });
                }
            }
        }
        for (kind, estimates) in kinds.iter().zip(per_kind) {
            let prediction_grid = predictions::prediction_grid(config.scenario, &base, pt.kappa_c)?;
            let pred = predictions::predict_width(&prediction_grid, &noise, *kind, config.convention)?;
            let (estimate_mean, estimate_spread) = mean_spread(&estimates);
            stats.push(EnsembleStats {
                kappa_c: pt.kappa_c,
                kind: *kind,
                estimate_mean,
                estimate_spread,
                predicted: pred.value,
                gamma_eff: pred.gamma_eff,
                runs_ok: estimates.len(),
                runs_failed: failed,
                valid: estimates.len() >= 2 && failed as f64 <= MAX_FAILED_FRACTION * config.runs as f64,
                estimates,
            });
        }
    }

    Ok(SweepResult {
        scenario: config.scenario,
        config_digest: config.digest(),
        seed: config.noise.seed,
        stats,
        sim_configs: points.iter().map(|p| (p.kappa_c, p.sim)).collect(),
        failures,
    })
}
