//! Ensemble experiments, recording analysis and file formats on top of
//! [`gridfluct_core`].
//!
//! - [`config`]: JSON experiment and grid files.
//! - [`experiments`]: parallel, deterministic control sweeps.
//! - [`recording`]: frequency recordings from text/CSV.
//! - [`analysis`]: moments, autocorrelation, stable fits and power extraction for a recording.
//! - [`output`]: CSV tables, two-column plot data and manifests.

pub mod analysis;
pub mod config;
pub mod experiments;
pub mod output;
pub mod recording;

pub use gridfluct_core as core;

use experiments::{EnsembleStats, SweepResult};

/// Sweep points whose mean lies more than `k` spreads from the prediction, or that are invalid.
pub fn breaches(result: &SweepResult, k: f64) -> Vec<&EnsembleStats> {
    result
        .stats
        .iter()
        .filter(|s| !s.valid || !(s.deviation() <= k))
        .collect()
}
