//! Seeded Monte Carlo ensembles over scenario parameters.
//!
//! Run `k` draws its dispersions from a ChaCha20 stream seeded with
//! [`run_seed`]`(master_seed, k)`, so every sampled value and every output
//! depends only on the plan, never on worker count or completion order.
//! Archive layout:
//!
//! ```text
//! <dir>/manifest.json          written last
//! <dir>/run_<k>/outputs.csv
//! <dir>/run_<k>/telemetry.jsonl
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsw::FswMode;
use crate::kernel::sec2nano;
use crate::scenario::{
    build_scenario, canonical_parameter, parameter_dim, parameter_value, run_scenario, set_parameter, telemetry_lines,
    write_csv, ScenarioConfig, ScenarioError, ScenarioKind,
};

pub const MANIFEST_FORMAT: &str = "orbitforge-mc/1";
pub const SEED_MIX: &str = "splitmix64(master_seed + 0x9E3779B97F4A7C15 * (k + 1))";

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid Monte Carlo plan: {0}")]
    Invalid(String),
    #[error("archive directory {} already exists (use --force to overwrite)", .0.display())]
    ArchiveExists(PathBuf),
    #[error("refusing to overwrite {}: it is not empty and holds no manifest.json", .0.display())]
    NotAnArchive(PathBuf),
    #[error("no manifest in {}", .0.display())]
    NoManifest(PathBuf),
    #[error("corrupt manifest {}: {message}", path.display())]
    CorruptManifest { path: PathBuf, message: String },
    #[error("archive integrity error: {0}")]
    Integrity(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl McError {
    pub fn is_validation(&self) -> bool {
        match self {
            McError::Invalid(_) | McError::ArchiveExists(_) | McError::NotAnArchive(_) => true,
            McError::Scenario(e) => e.is_validation(),
            _ => false,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> McError + '_ {
    move |source| McError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Standard deviation of a Cartesian normal dispersion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StdDev {
    Isotropic(f64),
    PerAxis([f64; 3]),
}

impl StdDev {
    fn axis(&self, k: usize) -> f64 {
        match self {
            StdDev::Isotropic(s) => *s,
            StdDev::PerAxis(v) => v[k],
        }
    }
}

/// Distribution of one dispersed parameter. Further distributions slot in
/// as extra variants with a matching arm in [`sample_dispersion`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dispersion {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `mean: None` means the scenario's nominal value.
    NormalVectorCart {
        mean: Option<[f64; 3]>,
        std: StdDev,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionSpec {
    pub target: String,
    #[serde(flatten)]
    pub dist: Dispersion,
}

impl DispersionSpec {
    pub fn uniform(target: &str, lo: f64, hi: f64) -> Self {
        DispersionSpec {
            target: target.to_string(),
            dist: Dispersion::Uniform { lo, hi },
        }
    }

    pub fn normal_vector_cart(target: &str, mean: Option<[f64; 3]>, std: StdDev) -> Self {
        DispersionSpec {
            target: target.to_string(),
            dist: Dispersion::NormalVectorCart { mean, std },
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        let dim = parameter_dim(&self.target)
            .ok_or_else(|| McError::Invalid(format!("unknown dispersion target `{}`", self.target)))?;
        match &self.dist {
            Dispersion::Uniform { lo, hi } => {
                if dim != 1 {
                    return Err(McError::Invalid(format!(
                        "uniform dispersion needs a scalar target, `{}` has {dim} components",
                        self.target
                    )));
                }
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(McError::Invalid(format!(
                        "uniform bounds need lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            Dispersion::NormalVectorCart { mean, std } => {
                if dim != 3 {
                    return Err(McError::Invalid(format!(
                        "normal_vector_cart needs a 3-vector target, `{}` has {dim} component(s)",
                        self.target
                    )));
                }
                if mean.is_some_and(|m| m.iter().any(|x| !x.is_finite())) {
                    return Err(McError::Invalid("normal mean must be finite".into()));
                }
                if (0..3).any(|k| !(std.axis(k) > 0.0 && std.axis(k).is_finite())) {
                    return Err(McError::Invalid(format!("normal std must be positive, got {std:?}")));
                }
            }
        }
        Ok(())
    }
}

/// Draws one value. Uniform samples lie in `[lo, hi)`; normal samples are
/// `mean + N(0, std)` per component, with `nominal` standing in for an
/// unspecified mean.
pub fn sample_dispersion(spec: &DispersionSpec, rng: &mut ChaCha20Rng, nominal: &[f64]) -> Vec<f64> {
    match &spec.dist {
        Dispersion::Uniform { lo, hi } => {
            let d = Uniform::new(*lo, *hi).expect("bounds checked by validate");
            vec![d.sample(rng)]
        }
        Dispersion::NormalVectorCart { mean, std } => {
            let m = mean.unwrap_or_else(|| [nominal[0], nominal[1], nominal[2]]);
            (0..3)
                .map(|k| {
                    let d = Normal::new(0.0, std.axis(k)).expect("std checked by validate");
                    m[k] + d.sample(rng)
                })
                .collect()
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `k`: a SplitMix64 finalisation of the master seed offset by
/// a golden-ratio multiple of `k + 1`.
pub fn run_seed(master_seed: u64, k: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k + 1)))
}

pub fn run_rng(master_seed: u64, k: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(run_seed(master_seed, k))
}

#[derive(Debug, Clone)]
pub struct McPlan {
    pub kind: ScenarioKind,
    pub base: ScenarioConfig,
    pub execution_count: usize,
    pub archive_dir: PathBuf,
    pub master_seed: u64,
    pub dispersions: Vec<DispersionSpec>,
    pub workers: usize,
    /// Replace an existing archive.
    pub force: bool,
    /// Overrides the configured mode.
    pub mode: Option<FswMode>,
    /// Overrides the configured simulation time, s.
    pub stop_s: Option<f64>,
}

impl McPlan {
    pub fn new(
        kind: ScenarioKind,
        base: ScenarioConfig,
        execution_count: usize,
        archive_dir: impl Into<PathBuf>,
    ) -> Self {
        McPlan {
            kind,
            base,
            execution_count,
            archive_dir: archive_dir.into(),
            master_seed: 0,
            dispersions: Vec::new(),
            workers: 1,
            force: false,
            mode: None,
            stop_s: None,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.execution_count < 1 {
            return Err(McError::Invalid("execution count must be at least 1".into()));
        }
        if self.workers < 1 {
            return Err(McError::Invalid("worker count must be at least 1".into()));
        }
        let mut seen = Vec::new();
        for d in &self.dispersions {
            d.validate()?;
            let t = canonical_parameter(&d.target);
            if seen.contains(&t) {
                return Err(McError::Invalid(format!("dispersion target `{t}` listed twice")));
            }
            seen.push(t);
        }
        if let Some(s) = self.stop_s {
            if !(s > 0.0 && s.is_finite()) {
                return Err(McError::Invalid(format!("stop time must be positive, got {s}")));
            }
        }
        Ok(())
    }

    /// Dispersions with unspecified normal means replaced by the nominal
    /// value from the base config.
    fn resolved_dispersions(&self) -> Result<Vec<DispersionSpec>, McError> {
        self.dispersions
            .iter()
            .map(|d| {
                let mut d = d.clone();
                d.target = canonical_parameter(&d.target).to_string();
                if let Dispersion::NormalVectorCart { mean: mean @ None, .. } = &mut d.dist {
                    let v = parameter_value(&self.base, self.kind, &d.target)
                        .ok_or_else(|| McError::Invalid(format!("no nominal value for `{}`", d.target)))?;
                    *mean = Some([v[0], v[1], v[2]]);
                }
                Ok(d)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Success,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledValue {
    pub target: String,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub seed: u64,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub samples: Vec<SampledValue>,
    /// Rows in `outputs.csv` (0 for failed runs).
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub kind: String,
    pub master_seed: u64,
    pub seed_mix: String,
    pub execution_count: usize,
    pub dispersions: Vec<DispersionSpec>,
    pub runs: Vec<RunRecord>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest is plain data");
        s.push('\n');
        s
    }

    pub fn successes(&self) -> usize {
        self.runs.iter().filter(|r| r.status == RunStatus::Success).count()
    }

    /// Sampled values of `target` over successful and failed runs alike.
    pub fn sampled(&self, target: &str) -> Vec<Vec<f64>> {
        let target = canonical_parameter(target);
        self.runs
            .iter()
            .filter_map(|r| r.samples.iter().find(|s| s.target == target).map(|s| s.value.clone()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct McArchive {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl McArchive {
    pub fn run_dir(&self, k: usize) -> PathBuf {
        run_dir(&self.dir, k)
    }

    pub fn outputs_path(&self, k: usize) -> PathBuf {
        self.run_dir(k).join("outputs.csv")
    }

    pub fn telemetry_path(&self, k: usize) -> PathBuf {
        self.run_dir(k).join("telemetry.jsonl")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join("manifest.json")
    }

    pub fn read_outputs(&self, k: usize) -> Result<String, McError> {
        let p = self.outputs_path(k);
        fs::read_to_string(&p).map_err(io_err(&p))
    }
}

fn run_dir(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("run_{k}"))
}

struct RunOutput {
    record: RunRecord,
    files: Option<(Vec<u8>, Vec<u8>)>,
}

fn execute_run(plan: &McPlan, dispersions: &[DispersionSpec], k: usize) -> RunOutput {
    let seed = run_seed(plan.master_seed, k as u64);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut config = plan.base.clone();
    let mut samples = Vec::with_capacity(dispersions.len());
    let mut outcome: Result<(Vec<u8>, Vec<u8>, usize), ScenarioError> = Ok((Vec::new(), Vec::new(), 0));
    for d in dispersions {
        let value = sample_dispersion(d, &mut rng, &[]);
        if outcome.is_ok() {
            if let Err(e) = set_parameter(&mut config, plan.kind, &d.target, &value) {
                outcome = Err(e);
            }
        }
        samples.push(SampledValue {
            target: d.target.clone(),
            value,
        });
    }
    if outcome.is_ok() {
        outcome = simulate(plan, &config);
    }
    match outcome {
        Ok((csv, jsonl, rows)) => RunOutput {
            record: RunRecord {
                index: k,
                seed,
                status: RunStatus::Success,
                error: None,
                samples,
                rows,
            },
            files: Some((csv, jsonl)),
        },
        Err(e) => {
            log::warn!("run {k} failed: {e}");
            RunOutput {
                record: RunRecord {
                    index: k,
                    seed,
                    status: RunStatus::Failed,
                    error: Some(e.to_string()),
                    samples,
                    rows: 0,
                },
                files: None,
            }
        }
    }
}

fn simulate(plan: &McPlan, config: &ScenarioConfig) -> Result<(Vec<u8>, Vec<u8>, usize), ScenarioError> {
    let mut inst = build_scenario(config, plan.kind)?;
    let out = run_scenario(&mut inst, plan.mode, plan.stop_s.map(sec2nano))?;
    if out.is_empty() {
        return Err(ScenarioError::NoSamples);
    }
    let mut csv = Vec::new();
    write_csv(&out, &mut csv).map_err(|source| ScenarioError::Io {
        path: "outputs.csv".into(),
        source,
    })?;
    let mut jsonl = String::new();
    for line in telemetry_lines(&inst)? {
        jsonl.push_str(&line);
        jsonl.push('\n');
    }
    Ok((csv, jsonl.into_bytes(), out.len()))
}

fn prepare_archive_dir(dir: &Path, force: bool) -> Result<(), McError> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(io_err(dir))?;
        let empty = entries.next().is_none();
        if !empty {
            if !force {
                return Err(McError::ArchiveExists(dir.to_path_buf()));
            }
            if !dir.join("manifest.json").is_file() {
                return Err(McError::NotAnArchive(dir.to_path_buf()));
            }
            fs::remove_dir_all(dir).map_err(io_err(dir))?;
        }
    }
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Runs the ensemble and writes the archive. Individual run failures are
/// recorded in the manifest and do not stop the ensemble.
pub fn execute_simulations(plan: &McPlan) -> Result<McArchive, McError> {
    plan.validate()?;
    let dispersions = plan.resolved_dispersions()?;
    // Fail early on a base config that cannot build at all.
    build_scenario(&plan.base, plan.kind)?;
    prepare_archive_dir(&plan.archive_dir, plan.force)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| McError::Pool(e.to_string()))?;
    let (tx, rx) = mpsc::channel::<RunOutput>();
    let dir = plan.archive_dir.clone();
    let writer = std::thread::spawn(move || -> Result<Vec<RunRecord>, McError> {
        let mut records = Vec::new();
        for out in rx {
            if let Some((csv, jsonl)) = &out.files {
                let rd = run_dir(&dir, out.record.index);
                fs::create_dir_all(&rd).map_err(io_err(&rd))?;
                let p = rd.join("outputs.csv");
                fs::write(&p, csv).map_err(io_err(&p))?;
                let p = rd.join("telemetry.jsonl");
                fs::write(&p, jsonl).map_err(io_err(&p))?;
            }
            log::info!("run {} {:?}", out.record.index, out.record.status);
            records.push(out.record);
        }
        Ok(records)
    });

    pool.install(|| {
        (0..plan.execution_count).into_par_iter().for_each_with(tx, |tx, k| {
            // The writer only hangs up after an IO error, reported below.
            let _ = tx.send(execute_run(plan, &dispersions, k));
        })
    });
    let mut runs = writer
        .join()
        .map_err(|_| McError::Pool("archive writer panicked".into()))??;
    runs.sort_by_key(|r| r.index);

    let manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        kind: plan.kind.as_str().into(),
        master_seed: plan.master_seed,
        seed_mix: SEED_MIX.into(),
        execution_count: plan.execution_count,
        dispersions,
        runs,
    };
    let path = plan.archive_dir.join("manifest.json");
    fs::write(&path, manifest.to_json()).map_err(io_err(&path))?;
    Ok(McArchive {
        dir: plan.archive_dir.clone(),
        manifest,
    })
}

/// Reads an archive back and checks that it is complete.
pub fn load_archive(dir: &Path) -> Result<McArchive, McError> {
    let path = dir.join("manifest.json");
    if !path.is_file() {
        return Err(McError::NoManifest(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| McError::CorruptManifest {
        path: path.clone(),
        message: e.to_string(),
    })?;
    if manifest.format != MANIFEST_FORMAT {
        return Err(McError::CorruptManifest {
            path,
            message: format!("unsupported format `{}`", manifest.format),
        });
    }
    if manifest.runs.len() != manifest.execution_count {
        return Err(McError::Integrity(format!(
            "manifest lists {} runs but execution_count is {}",
            manifest.runs.len(),
            manifest.execution_count
        )));
    }
    let archive = McArchive {
        dir: dir.to_path_buf(),
        manifest,
    };
    for (k, run) in archive.manifest.runs.iter().enumerate() {
        if run.index != k {
            return Err(McError::Integrity(format!(
                "manifest entry {k} has index {}",
                run.index
            )));
        }
        if run.status == RunStatus::Success {
            for p in [archive.outputs_path(k), archive.telemetry_path(k)] {
                if !p.is_file() {
                    return Err(McError::Integrity(format!(
                        "run_{k} is missing {}",
                        p.file_name().unwrap_or_default().to_string_lossy()
                    )));
                }
            }
        }
    }
    Ok(archive)
}
