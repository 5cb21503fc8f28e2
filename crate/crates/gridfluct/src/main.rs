use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridfluct::analysis::{analyze_recording, AnalysisOptions};
use gridfluct::config::{ExperimentConfig, GridFile, Scale};
use gridfluct::experiments::{run_sweep, simulate_run};
use gridfluct::output::{self, sha256_hex};
use gridfluct::recording::{self, FrequencyRecording, DEFAULT_CADENCE, DEFAULT_F_REF};
use gridfluct_core::estimators::StableMethod;
use gridfluct_core::integrator::simulate_ou;
use gridfluct_core::noise::NoiseFamily;
use gridfluct_core::predictions::{prediction_curve, ScaleConvention, WidthKind};
use gridfluct_core::{ControlRule, ScenarioId};

const CONFIG_ERROR: u8 = 1;
const RUNTIME_ERROR: u8 = 2;
const THRESHOLD_BREACH: u8 = 3;

/// Swing-equation frequency fluctuation experiments.
#[derive(Parser)]
#[command(name = "gridfluct", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble sweep over control strengths.
    Sweep(SweepArgs),
    /// Analyse a frequency recording.
    Analyze(AnalyzeArgs),
    /// Grid file utilities.
    Grid {
        #[command(subcommand)]
        command: GridCommand,
    },
    /// Tabulate width predictions.
    Predict(PredictArgs),
    /// Write a synthetic Ornstein-Uhlenbeck frequency recording.
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum GridCommand {
    /// Check a grid file or built-in scenario against the model's invariants.
    Validate {
        file: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        kappa_c: f64,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    /// Stability parameter; values below 2 select stable noise.
    #[arg(long)]
    alpha: Option<f64>,
    /// Noise scale per node.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if any point deviates from its prediction by more than this many spreads.
    #[arg(long)]
    check: Option<f64>,
    /// Also export run 0 at every sweep point.
    #[arg(long)]
    trajectories: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_F_REF)]
    f_ref: f64,
    #[arg(long, default_value_t = DEFAULT_CADENCE)]
    cadence: f64,
    /// Relaxation rate for the extraction instead of the fitted one.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    max_lag: Option<f64>,
    /// Use the quantile fit only, without empirical-CF refinement.
    #[arg(long)]
    quantile: bool,
    #[arg(long, default_value = "analysis")]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Comma-separated control strengths.
    #[arg(long, value_delimiter = ',')]
    kappa_c: Option<Vec<f64>>,
    #[arg(long)]
    published: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_CADENCE)]
    cadence: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_F_REF)]
    f_ref: f64,
}

enum Failure {
    Config(String),
    Runtime(String),
    Breach(String),
}

fn config_err(e: impl Display) -> Failure {
    Failure::Config(e.to_string())
}

fn runtime_err(e: impl Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn experiment_config(args: &ExperimentArgs) -> Result<ExperimentConfig, Failure> {
    let mut c = match &args.config {
        Some(p) => ExperimentConfig::load(p).map_err(config_err)?,
        None => ExperimentConfig::for_scenario(ScenarioId::Homogeneous, NoiseFamily::Gaussian, 2.0, 0.01, 0),
    };
    if let Some(s) = &args.scenario {
        c.scenario = s.parse().map_err(config_err)?;
    }
    if let Some(a) = args.alpha {
        c.noise.alpha = a;
        c.noise.family = if a < 2.0 { NoiseFamily::Stable } else { NoiseFamily::Gaussian };
        c.kinds = None;
    }
    if let Some(s) = args.scale {
        c.noise.scale = Scale::Uniform(s);
    }
    if let Some(s) = args.seed {
        c.noise.seed = s;
    }
    Ok(c)
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut c = experiment_config(&args.experiment)?;
    if let Some(r) = args.runs {
        c.runs = r;
    }
    if let Some(s) = args.samples {
        c.samples_per_run = s;
    }
    if let Some(o) = args.out {
        c.output_dir = o;
    }
    c.validate().map_err(config_err)?;
    let result = run_sweep(&c).map_err(runtime_err)?;
    let mut trajectories = Vec::new();
    if args.trajectories {
        for (i, &k) in c.kappa_c_grid.iter().enumerate() {
            let t = simulate_run(&c, k, 0).map_err(runtime_err)?;
            trajectories.push((format!("trajectory_{i:02}"), t));
        }
    }
    output::emit_sweep(&result, &c, &trajectories, &c.output_dir).map_err(runtime_err)?;
    print!("{}", output::sweep_csv(&result));
    for f in &result.failures {
        eprintln!("run {} at kappa_c = {} failed: {}", f.run, f.kappa_c, f.message);
    }
    if let Some(k) = args.check {
        let bad = gridfluct::breaches(&result, k);
        if !bad.is_empty() {
            let list: Vec<String> = bad
                .iter()
                .map(|s| format!("kappa_c = {} ({}): {:.2} spreads", s.kappa_c, s.kind.as_str(), s.deviation()))
                .collect();
            return Err(Failure::Breach(list.join("; ")));
        }
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let rec = recording::ingest_recording(&args.file, args.f_ref, args.cadence).map_err(config_err)?;
    for g in &rec.gaps {
        eprintln!("gap before line {}: {} missing samples", g.line, g.missing);
    }
    let options = AnalysisOptions {
        max_lag: args.max_lag,
        gamma: args.gamma,
        method: if args.quantile { StableMethod::Quantile } else { StableMethod::Ecf },
    };
    let analysis = analyze_recording(&rec, &options).map_err(runtime_err)?;
    let digest = sha256_hex(rec.to_csv().as_bytes());
    output::emit_analysis(&analysis, digest, &args.out).map_err(runtime_err)?;
    println!("{}", serde_json::to_string_pretty(&analysis.report).expect("report serializes"));
    Ok(())
}

fn grid(command: GridCommand) -> Result<(), Failure> {
    let GridCommand::Validate { file, scenario, kappa_c } = command;
    let (base, rule) = match (file, scenario) {
        (Some(p), _) => (GridFile::load(&p).map_err(config_err)?.to_grid().map_err(config_err)?, ControlRule::AllNodes),
        (None, Some(s)) => {
            let id: ScenarioId = s.parse().map_err(config_err)?;
            (id.base_grid().map_err(config_err)?, id.control_rule())
        }
        (None, None) => return Err(Failure::Config("give a grid file or --scenario".into())),
    };
    let g = base.with_control(kappa_c, rule).map_err(config_err)?;
    let violations = g.validate();
    let gamma = g.effective_gamma();
    println!("nodes: {}", g.n);
    println!("edges: {}", g.edges().len());
    println!("bulk gamma: {}", gamma.bulk);
    println!("uniform damping ratio: {}", gamma.uniform);
    if violations.is_empty() {
        println!("valid");
        Ok(())
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Err(Failure::Config(format!("{} violation(s)", violations.len())))
    }
}

fn predict(args: PredictArgs) -> Result<(), Failure> {
    let mut c = experiment_config(&args.experiment)?;
    if let Some(k) = args.kappa_c {
        c.kappa_c_grid = k;
    }
    if args.published {
        c.convention = ScaleConvention::Published;
    }
    c.validate().map_err(config_err)?;
    let base = c.base_grid().map_err(config_err)?;
    let noise = c.noise.to_spec(base.n);
    let mut kappa = Vec::new();
    let mut preds = Vec::new();
    for kind in c.kinds() {
        let curve = prediction_curve(c.scenario, Some(&base), &noise, &c.kappa_c_grid, kind, c.convention)
            .map_err(runtime_err)?;
        kappa.extend_from_slice(&c.kappa_c_grid);
        preds.extend(curve);
    }
    if preds.iter().any(|p| p.approximate) && preds.iter().any(|p| p.kind == WidthKind::Std) {
        eprintln!("note: damping ratios are not uniform; predictions use the bulk ratio only");
    }
    print!("{}", output::prediction_csv(&kappa, &preds));
    if let Some(dir) = args.out {
        output::emit_predictions(&kappa, &preds, c.digest(), &dir).map_err(runtime_err)?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let omega = simulate_ou(args.gamma, args.sigma, args.alpha, args.cadence, args.samples, args.seed)
        .map_err(config_err)?;
    let rec = FrequencyRecording::from_omega(&omega, args.f_ref, args.cadence);
    std::fs::write(&args.out, rec.to_csv())
        .map_err(|e| runtime_err(format!("cannot write {}: {e}", args.out.display())))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Analyze(a) => analyze(a),
        Command::Grid { command } => grid(command),
        Command::Predict(a) => predict(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(CONFIG_ERROR)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(RUNTIME_ERROR)
        }
        Err(Failure::Breach(m)) => {
            eprintln!("threshold breach: {m}");
            ExitCode::from(THRESHOLD_BREACH)
        }
    }
}
