//! Output tables, plot-data files and manifests.
//!
//! Every file is a pure function of its inputs: no timestamps, fixed
//! ordering, shortest round-trip float formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gridfluct_core::predictions::WidthPrediction;
use gridfluct_core::Trajectory;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::Analysis;
use crate::config::ExperimentConfig;
use crate::experiments::SweepResult;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
#[error("cannot write {path}: {source}")]
pub struct OutputError {
    pub path: PathBuf,
    pub source: std::io::Error,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub config_digest: String,
    pub seed: Option<u64>,
    /// How per-run noise streams derive from the seed.
    pub streams: &'static str,
    pub files: Vec<FileEntry>,
}

const STREAMS: &str = "chacha8 keyed by (seed, run, node)";

struct Writer {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, OutputError> {
        fs::create_dir_all(dir).map_err(|source| OutputError {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, contents: &str) -> Result<(), OutputError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| OutputError { path, source })?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: contents.len(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    fn finish(mut self, kind: &'static str, config_digest: String, seed: Option<u64>) -> Result<Manifest, OutputError> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            kind,
            config_digest,
            seed,
            streams: STREAMS,
            files: self.files,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let path = self.dir.join(MANIFEST);
        fs::write(&path, json).map_err(|source| OutputError { path, source })?;
        Ok(manifest)
    }
}

pub fn two_column(x: &[f64], y: &[f64]) -> String {
    let mut s = String::new();
    for (a, b) in x.iter().zip(y) {
        writeln!(s, "{a} {b}").unwrap();
    }
    s
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut s = String::from("kappa_c,kind,estimate_mean,estimate_spread,predicted,gamma_eff,runs_ok,runs_failed,valid\n");
    for p in &result.stats {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            p.kappa_c,
            p.kind.as_str(),
            p.estimate_mean,
            p.estimate_spread,
            p.predicted,
            p.gamma_eff,
            p.runs_ok,
            p.runs_failed,
            p.valid
        )
        .unwrap();
    }
    s
}

pub fn prediction_csv(kappa: &[f64], predictions: &[WidthPrediction]) -> String {
    let mut s = String::from("kappa_c,kind,predicted,gamma_eff,approximate\n");
    for (k, p) in kappa.iter().zip(predictions) {
        writeln!(s, "{k},{},{},{},{}", p.kind.as_str(), p.value, p.gamma_eff, p.approximate).unwrap();
    }
    s
}

fn failures_csv(result: &SweepResult) -> String {
    let mut s = String::from("kappa_c,run,message\n");
    for f in &result.failures {
        writeln!(s, "{},{},\"{}\"", f.kappa_c, f.run, f.message.replace('"', "'")).unwrap();
    }
    s
}

/// Columns `t bulk node_1 … node_n`.
pub fn trajectory_text(traj: &Trajectory) -> String {
    let mut s = String::new();
    for (i, (t, b)) in traj.times.iter().zip(&traj.bulk_omega).enumerate() {
        write!(s, "{t} {b}").unwrap();
        if let Some(row) = traj.node_row(i) {
            for w in row {
                write!(s, " {w}").unwrap();
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct TrajectorySidecar<'a> {
    columns: Vec<String>,
    samples: usize,
    digest: String,
    meta: &'a gridfluct_core::integrator::TrajectoryMeta,
}

fn trajectory_sidecar(traj: &Trajectory) -> String {
    let mut columns = vec!["t".to_string(), "bulk_omega".to_string()];
    if traj.node_omega.is_some() {
        columns.extend((1..=traj.n).map(|i| format!("omega_{i}")));
    }
    let side = TrajectorySidecar {
        columns,
        samples: traj.times.len(),
        digest: format!("{:016x}", traj.digest()),
        meta: &traj.meta,
    };
    serde_json::to_string_pretty(&side).expect("sidecar serializes") + "\n"
}

/// Writes the sweep table, the prediction table, run failures, optional
/// trajectories and the manifest.
pub fn emit_sweep(
    result: &SweepResult,
    config: &ExperimentConfig,
    trajectories: &[(String, Trajectory)],
    dir: &Path,
) -> Result<Manifest, OutputError> {
    let mut w = Writer::new(dir)?;
    w.put("sweep.csv", &sweep_csv(result))?;
    let mut pred = String::from("kappa_c,kind,predicted,gamma_eff\n");
    for p in &result.stats {
        writeln!(pred, "{},{},{},{}", p.kappa_c, p.kind.as_str(), p.predicted, p.gamma_eff).unwrap();
    }
    w.put("predictions.csv", &pred)?;
    w.put("failures.csv", &failures_csv(result))?;
    let mut cfg = serde_json::to_string_pretty(config).expect("config serializes");
    cfg.push('\n');
    w.put("config.json", &cfg)?;
    for (name, traj) in trajectories {
        w.put(&format!("{name}.txt"), &trajectory_text(traj))?;
        w.put(&format!("{name}.json"), &trajectory_sidecar(traj))?;
    }
    w.finish("sweep", result.config_digest.clone(), Some(result.seed))
}

/// Writes `report.json`, one two-column file per curve, and the manifest.
/// `source_digest` identifies the analysed input.
pub fn emit_analysis(analysis: &Analysis, source_digest: String, dir: &Path) -> Result<Manifest, OutputError> {
    let mut w = Writer::new(dir)?;
    let report = serde_json::to_string_pretty(&analysis.report).expect("report serializes") + "\n";
    w.put("report.json", &report)?;
    for c in &analysis.curves {
        w.put(&format!("{}.txt", c.name), &two_column(&c.x, &c.y))?;
    }
    w.finish("analysis", source_digest, None)
}

/// Writes a prediction table and manifest.
pub fn emit_predictions(
    kappa: &[f64],
    predictions: &[WidthPrediction],
    config_digest: String,
    dir: &Path,
) -> Result<Manifest, OutputError> {
    let mut w = Writer::new(dir)?;
    w.put("predictions.csv", &prediction_csv(kappa, predictions))?;
    w.finish("prediction", config_digest, None)
}
