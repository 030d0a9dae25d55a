//! `orbitforge` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input (config, flags, archive policy),
//! 3 runtime failure. Log level comes from `ORBITFORGE_LOG`.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod disperse;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orbitforge::fsw::FswMode;
use orbitforge::kernel::sec2nano;
use orbitforge::montecarlo::{execute_simulations, McError, McPlan, RunStatus};
use orbitforge::scenario::{
    build_scenario, default_plot, emit_svg_plot, export_csv, export_telemetry_jsonl, load_config, resolve_kind,
    run_scenario, validate, ScenarioConfig, ScenarioError, ScenarioKind,
};

#[derive(Debug, Parser)]
#[command(name = "orbitforge", version, about = "Modular spacecraft simulation runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and run one scenario, writing the requested exports.
    Run(RunArgs),
    /// Run a seeded Monte Carlo ensemble into an archive directory.
    Mc(McArgs),
    /// Print the process/task/module execution order.
    ExecOrder(KindArgs),
    /// Check a config file and report every violation.
    Validate { config: PathBuf },
}

#[derive(Debug, Args)]
struct KindArgs {
    config: PathBuf,
    /// basicOrbit, earthOrbit, sunEarth or attitudeControl; defaults to the
    /// config's `kind` key.
    #[arg(long)]
    kind: Option<ScenarioKind>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    target: KindArgs,
    /// standby, inertialPoint or hillPoint.
    #[arg(long)]
    mode: Option<FswMode>,
    /// Stop time in seconds; defaults to the configured simulation time.
    #[arg(long)]
    stop_s: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Overrides simulation.num_data_points.
    #[arg(long)]
    num_points: Option<u64>,
}

#[derive(Debug, Args)]
struct McArgs {
    #[command(flatten)]
    target: KindArgs,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long)]
    archive: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// `uniform:<target>:<lo>:<hi>` or
    /// `normal_vector_cart:<target>:<std>[:<mean>]`, where std is a scalar
    /// or `sx,sy,sz` and mean is `x,y,z`. Repeatable.
    #[arg(long = "disperse", value_parser = disperse::parse)]
    dispersions: Vec<orbitforge::montecarlo::DispersionSpec>,
    #[arg(long)]
    mode: Option<FswMode>,
    #[arg(long)]
    stop_s: Option<f64>,
    #[arg(long)]
    num_points: Option<u64>,
    /// Replace an existing archive.
    #[arg(long)]
    force: bool,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure {
            code: if e.is_validation() { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

impl From<McError> for Failure {
    fn from(e: McError) -> Self {
        Failure {
            code: if e.is_validation() { 2 } else { 3 },
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ORBITFORGE_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Mc(a) => cmd_mc(a),
        Command::ExecOrder(a) => cmd_exec_order(a),
        Command::Validate { config } => cmd_validate(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation(format!("cannot read {}: {e}", path.display())))?;
    let loaded = load_config(&text)?;
    for w in &loaded.warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(loaded.config)
}

fn check_stop(stop_s: Option<f64>) -> Result<(), Failure> {
    match stop_s {
        Some(s) if !(s > 0.0 && s.is_finite()) => {
            Err(Failure::validation(format!("--stop-s must be positive, got {s}")))
        }
        _ => Ok(()),
    }
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let mut config = load(&a.target.config)?;
    if let Some(n) = a.num_points {
        config.simulation.num_data_points = Some(n);
    }
    check_stop(a.stop_s)?;
    let kind = resolve_kind(&config, a.target.kind)?;
    let mut inst = build_scenario(&config, kind)?;
    let out = run_scenario(&mut inst, a.mode, a.stop_s.map(sec2nano))?;

    if let Some(p) = &a.csv {
        export_csv(&out, p)?;
    }
    if let Some(p) = &a.jsonl {
        export_telemetry_jsonl(&inst, p)?;
    }
    if let Some(p) = &a.plot {
        let (spec, series) = default_plot(&out).ok_or(ScenarioError::NoSamples)?;
        emit_svg_plot(&out.t_s(), &series, &spec, p)?;
    }

    let final_t = out.times.last().map_or(0.0, |t| t.as_secs_f64());
    let mut summary = format!("{kind}: final time {final_t:.3} s, {} samples", out.len());
    if inst.fsw.is_some() {
        if let Some(s) = out.last("sigma_BR") {
            let norm = s.iter().map(|x| x * x).sum::<f64>().sqrt();
            summary.push_str(&format!(", final |sigma_BR| {norm:.6e}"));
        }
    }
    println!("{summary}");
    Ok(())
}

fn cmd_mc(a: McArgs) -> Result<(), Failure> {
    let mut config = load(&a.target.config)?;
    if let Some(n) = a.num_points {
        config.simulation.num_data_points = Some(n);
    }
    let kind = resolve_kind(&config, a.target.kind)?;
    let mut plan = McPlan::new(kind, config, a.runs, &a.archive);
    plan.master_seed = a.seed;
    plan.workers = a.workers;
    plan.dispersions = a.dispersions;
    plan.force = a.force;
    plan.mode = a.mode;
    plan.stop_s = a.stop_s;
    let archive = execute_simulations(&plan)?;
    for r in &archive.manifest.runs {
        match (&r.status, &r.error) {
            (RunStatus::Failed, Some(e)) => println!("run {}: failed: {e}", r.index),
            _ => println!("run {}: success ({} rows)", r.index, r.rows),
        }
    }
    println!(
        "{}/{} runs succeeded; manifest: {}",
        archive.manifest.successes(),
        archive.manifest.execution_count,
        archive.manifest_path().display()
    );
    Ok(())
}

fn cmd_exec_order(a: KindArgs) -> Result<(), Failure> {
    let config = load(&a.config)?;
    let kind = resolve_kind(&config, a.kind)?;
    let inst = build_scenario(&config, kind)?;
    print!("{}", inst.show_execution_order());
    for tag in inst.sim.orphan_models() {
        log::warn!("module `{tag}` is registered but not added to any task");
    }
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let config = match load(path) {
        Ok(c) => c,
        Err(f) => {
            println!("{}: INVALID", path.display());
            return Err(f);
        }
    };
    let issues = validate(&config);
    if issues.is_empty() {
        println!("{}: valid", path.display());
        return Ok(());
    }
    println!("{}: INVALID", path.display());
    for i in &issues {
        println!("  {i}");
    }
    Err(Failure::validation(format!("{} violation(s)", issues.len())))
}
