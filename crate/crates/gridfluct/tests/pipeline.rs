use std::fs;
use std::path::Path;

use gridfluct::analysis::{analyze_recording, AnalysisError, AnalysisOptions};
use gridfluct::config::{ExperimentConfig, GridFile};
use gridfluct::experiments::run_sweep;
use gridfluct::output::{emit_analysis, emit_sweep, MANIFEST};
use gridfluct::recording::{ingest_recording, FrequencyRecording};
use gridfluct_core::integrator::simulate_ou;
use gridfluct_core::noise::NoiseFamily;
use gridfluct_core::ScenarioId;

fn fixture() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/ou_3600.csv"))
}

#[test]
fn fixture_parses_without_gaps() {
    let rec = ingest_recording(fixture(), 50.0, 1.0).unwrap();
    assert_eq!(rec.len(), 3600);
    assert!(rec.gaps.is_empty());
    assert_eq!(rec.t[3599], 3599.0);
}

#[test]
fn short_recording_is_rejected() {
    let rec = ingest_recording(fixture(), 50.0, 1.0).unwrap();
    assert!(matches!(
        analyze_recording(&rec, &AnalysisOptions::default()),
        Err(AnalysisError::TooShort(3600))
    ));
}

#[test]
fn ou_recording_analysis() {
    let omega = simulate_ou(0.1, 0.01, 2.0, 1.0, 200_000, 31).unwrap();
    let rec = FrequencyRecording::from_omega(&omega, 50.0, 1.0);
    let a = analyze_recording(&rec, &AnalysisOptions::default()).unwrap();
    let r = &a.report;
    assert!((0.09..=0.11).contains(&r.autocorrelation.gamma), "{:?}", r.autocorrelation);
    assert!((r.moments.kurtosis - 3.0).abs() < 0.1, "{:?}", r.moments);
    assert!(r.stable_fit.alpha > 1.9, "{:?}", r.stable_fit);
    // truncating the empirical CF may ring; the closed-form laws must not
    assert!(!a.extraction.gaussian.density.ringing && !a.extraction.stable.density.ringing);
    let names: Vec<_> = a.curves.iter().map(|c| c.name).collect();
    assert!(names.contains(&"acf") && names.contains(&"power_empirical"));
    for c in &a.curves {
        assert!(c.y.iter().all(|v| v.is_finite()), "{}", c.name);
    }
}

#[test]
fn stable_recording_analysis() {
    let omega = simulate_ou(0.1, 0.01, 1.5, 1.0, 200_000, 32).unwrap();
    let rec = FrequencyRecording::from_omega(&omega, 50.0, 1.0);
    let a = analyze_recording(&rec, &AnalysisOptions::default()).unwrap();
    let r = &a.report;
    assert!((r.stable_fit.alpha - 1.5).abs() <= 0.1, "{:?}", r.stable_fit);
    assert!(r.moments.kurtosis > 3.0);
    let head = analyze_recording(
        &FrequencyRecording::from_omega(&omega[..20_000], 50.0, 1.0),
        &AnalysisOptions::default(),
    )
    .unwrap();
    assert!(r.moments.kurtosis > head.report.moments.kurtosis);
    // stationary omega scale σ/(αγ)^{1/α}; node power scale recovered from it
    let c_omega = 0.01 / (0.15f64).powf(1.0 / 1.5);
    assert!((r.stable_fit.scale / c_omega - 1.0).abs() < 0.1, "{:?}", r.stable_fit);
    assert!((r.extraction.power_scale / 0.01 - 1.0).abs() < 0.1, "{:?}", r.extraction);
}

#[test]
fn analysis_outputs() {
    let omega = simulate_ou(0.2, 0.01, 2.0, 1.0, 20_000, 33).unwrap();
    let rec = FrequencyRecording::from_omega(&omega, 50.0, 1.0);
    let a = analyze_recording(&rec, &AnalysisOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = emit_analysis(&a, "digest".into(), dir.path()).unwrap();
    assert_eq!(m.files.len(), a.curves.len() + 1);
    let text = fs::read_to_string(dir.path().join("power_gaussian.txt")).unwrap();
    let row: Vec<f64> = text.lines().next().unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 2);
    assert!(dir.path().join(MANIFEST).exists());
}

fn tiny(scenario: ScenarioId) -> ExperimentConfig {
    let mut c = ExperimentConfig::for_scenario(scenario, NoiseFamily::Gaussian, 2.0, 0.01, 9);
    c.runs = 5;
    c.samples_per_run = 100;
    c.sim.span = 20.0;
    c
}

#[test]
fn sweep_outputs_and_idempotence() {
    let c = tiny(ScenarioId::Homogeneous);
    let r = run_sweep(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let first = emit_sweep(&r, &c, &[], dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 11);
    let before = fs::read(dir.path().join(MANIFEST)).unwrap();
    let second = emit_sweep(&r, &c, &[], dir.path()).unwrap();
    assert_eq!(first, second);
    assert_eq!(before, fs::read(dir.path().join(MANIFEST)).unwrap());
}

#[test]
fn unwritable_output_names_path() {
    let c = tiny(ScenarioId::Homogeneous);
    let r = run_sweep(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let err = emit_sweep(&r, &c, &[], &blocker.join("sub")).unwrap_err();
    assert!(err.to_string().contains("file"), "{err}");
}

#[test]
fn custom_grid_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.json");
    let g = ScenarioId::Homogeneous.base_grid().unwrap();
    fs::write(&path, serde_json::to_string(&GridFile::from_grid(&g)).unwrap()).unwrap();
    let mut c = tiny(ScenarioId::Custom);
    c.grid = Some(path);
    c.kappa_c_grid = vec![0.0, 0.5];
    let custom = run_sweep(&c).unwrap();
    let mut h = tiny(ScenarioId::Homogeneous);
    h.kappa_c_grid = vec![0.0, 0.5];
    let builtin = run_sweep(&h).unwrap();
    for (a, b) in custom.stats.iter().zip(&builtin.stats) {
        // edge order differs after the file round trip, so sums agree to rounding
        assert!((a.estimate_mean / b.estimate_mean - 1.0).abs() < 1e-12);
        assert!((a.predicted / b.predicted - 1.0).abs() < 1e-12);
    }
}

#[test]
fn config_json_round_trip_and_validation() {
    let text = r#"{
        "scenario": "generator-only",
        "noise": {"family": "stable", "alpha": 1.5, "scale": 0.01, "seed": 4},
        "kappa_c_grid": [0, 0.5],
        "runs": 10
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, text).unwrap();
    let c = ExperimentConfig::load(&path).unwrap();
    assert_eq!(c.samples_per_run, 1000);
    assert_eq!(c.kinds(), vec![gridfluct_core::WidthKind::StableScale]);

    for bad in [
        r#"{"scenario": "homogeneous", "noise": {"family": "gaussian", "scale": 0.01}, "runs": 1}"#,
        r#"{"scenario": "homogeneous", "noise": {"family": "gaussian", "scale": 0.01}, "kappa_c_grid": [0.5, 0.2]}"#,
        r#"{"scenario": "homogeneous", "noise": {"family": "gaussian", "scale": 0.01}, "kappa_c_grid": []}"#,
        r#"{"scenario": "custom", "noise": {"family": "gaussian", "scale": 0.01}}"#,
        r#"{"scenario": "homogeneous", "noise": {"family": "stable", "alpha": 1.5, "scale": 0.01}, "kinds": ["std"]}"#,
        r#"{"scenario": "homogeneous", "noise": {"family": "gaussian", "scale": [0.01, 0.02]}}"#,
        r#"{"scenario": "nowhere", "noise": {"family": "gaussian", "scale": 0.01}}"#,
    ] {
        fs::write(&path, bad).unwrap();
        assert!(ExperimentConfig::load(&path).is_err(), "{bad}");
    }
}
