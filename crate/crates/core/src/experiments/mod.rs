//! Seeded, reproducible study drivers.
//!
//! Each study maps a configuration onto a grid of cells, runs `repetitions`
//! independent replications per cell, and reduces them into per-cell records.
//! Replication RNG streams are derived from (master seed, study id, cell id,
//! repetition index), so results are identical under any parallel schedule;
//! failed repetitions are excluded and counted, never retried.

mod coverage;
mod mode_convergence;
mod regression_coverage;
mod tau_retention;

pub use coverage::run_coverage;
pub use mode_convergence::run_mode_convergence;
pub use regression_coverage::run_regression_coverage;
pub use tau_retention::run_tau_retention;

use crate::error::{Error, Result};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// The five studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    TauRetention,
    #[serde(alias = "coverage")]
    MultinomialCoverage,
    GammaCoverage,
    ModeConvergence,
    RegressionCoverage,
}

impl StudyKind {
    pub fn id(self) -> u64 {
        match self {
            StudyKind::TauRetention => 1,
            StudyKind::MultinomialCoverage => 2,
            StudyKind::GammaCoverage => 3,
            StudyKind::ModeConvergence => 4,
            StudyKind::RegressionCoverage => 5,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            StudyKind::TauRetention => "tau-retention",
            StudyKind::MultinomialCoverage => "coverage",
            StudyKind::GammaCoverage => "gamma-coverage",
            StudyKind::ModeConvergence => "mode-convergence",
            StudyKind::RegressionCoverage => "regression-coverage",
        }
    }
}

fn default_repetitions() -> usize {
    1000
}

fn default_resample() -> usize {
    5000
}

fn default_qmc() -> usize {
    4096
}

/// Study configuration. Fields that do not apply to a study are ignored by
/// it; grids left empty fall back to the study's documented defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub seed: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub sample_sizes: Vec<u64>,
    /// Analysis-prior correlation grid for the coverage studies.
    #[serde(default)]
    pub analysis_rhos: Vec<f64>,
    /// Case subset (1-6) for the mode-convergence and regression studies.
    #[serde(default)]
    pub cases: Vec<usize>,
    /// SIR proposal size; defaults to ten times the resample size.
    #[serde(default)]
    pub proposal_size: Option<usize>,
    #[serde(default = "default_resample")]
    pub resample_size: usize,
    #[serde(default)]
    pub systematic_resampling: bool,
    /// Quasi-Monte Carlo points per HPD area estimate (regression coverage).
    #[serde(default = "default_qmc")]
    pub qmc_points: usize,
    /// Worker threads; `None` uses the global default.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl StudyConfig {
    pub fn new(study: StudyKind, seed: u64) -> Self {
        StudyConfig {
            study,
            seed,
            repetitions: default_repetitions(),
            sample_sizes: Vec::new(),
            analysis_rhos: Vec::new(),
            cases: Vec::new(),
            proposal_size: None,
            resample_size: default_resample(),
            systematic_resampling: false,
            qmc_points: default_qmc(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions: must be at least 1".into()));
        }
        if self.sample_sizes.contains(&0) {
            return Err(Error::Config("sample_sizes: entries must be positive".into()));
        }
        for &rho in &self.analysis_rhos {
            if !(rho > -1.0 && rho < 1.0) {
                return Err(Error::Config(format!(
                    "analysis_rhos: correlation {rho} outside (-1,1)"
                )));
            }
        }
        for &case in &self.cases {
            if !(1..=6).contains(&case) {
                return Err(Error::Config(format!("cases: case {case} outside 1..=6")));
            }
        }
        if self.resample_size == 0 {
            return Err(Error::Config("resample_size: must be at least 1".into()));
        }
        if let Some(n) = self.proposal_size {
            if n < self.resample_size {
                return Err(Error::Config(
                    "proposal_size: must be at least the resample size".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn sir_sizes(&self) -> crate::posterior::SirSizes {
        crate::posterior::SirSizes {
            proposal_size: self.proposal_size.unwrap_or(10 * self.resample_size),
            resample_size: self.resample_size,
            systematic: self.systematic_resampling,
        }
    }

    pub fn sample_sizes_or(&self, default: &[u64]) -> Vec<u64> {
        if self.sample_sizes.is_empty() {
            default.to_vec()
        } else {
            self.sample_sizes.clone()
        }
    }

    pub fn cases_or_all(&self) -> Vec<usize> {
        if self.cases.is_empty() {
            (1..=6).collect()
        } else {
            self.cases.clone()
        }
    }

    /// FNV-1a hash of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in text.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

/// One reduced cell of a study.
#[derive(Clone, Debug, Serialize)]
pub struct CellRecord {
    pub cell_id: u64,
    pub sample_size: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<String>,
    /// What `estimate` measures, e.g. `median_tau` or `coverage`.
    pub statistic: String,
    pub estimate: f64,
    pub mc_se: f64,
    pub repetitions: usize,
    pub failures: usize,
    /// Externally tabulated reference value for this cell, when one is
    /// known, and the distance to it in Monte Carlo standard errors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_units_from_reference: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl CellRecord {
    pub(crate) fn attach_reference(&mut self, reference: Option<f64>) {
        if let Some(r) = reference {
            self.reference = Some(r);
            if self.mc_se > 0.0 {
                self.se_units_from_reference = Some((self.estimate - r).abs() / self.mc_se);
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub study: StudyKind,
    pub seed: u64,
    pub config_hash: String,
    pub config: StudyConfig,
    pub wall_time_seconds: f64,
    pub total_repetitions: usize,
    pub total_failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyResult {
    pub study: StudyKind,
    pub cells: Vec<CellRecord>,
    pub manifest: RunManifest,
}

/// Dispatch a validated configuration to its study, inside a thread pool of
/// the configured size.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_study_inner(config))
}

fn run_study_inner(config: &StudyConfig) -> Result<StudyResult> {
    let start = std::time::Instant::now();
    let cells = match config.study {
        StudyKind::TauRetention => tau_retention::cells(config)?,
        StudyKind::MultinomialCoverage | StudyKind::GammaCoverage => coverage::cells(config)?,
        StudyKind::ModeConvergence => mode_convergence::cells(config)?,
        StudyKind::RegressionCoverage => regression_coverage::cells(config)?,
    };
    let total_repetitions = cells.iter().map(|c| c.repetitions).sum();
    let total_failures = cells.iter().map(|c| c.failures).sum();
    let manifest = RunManifest {
        study: config.study,
        seed: config.seed,
        config_hash: config.hash(),
        config: config.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        total_repetitions,
        total_failures,
    };
    Ok(StudyResult { study: config.study, cells, manifest })
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent, schedule-free RNG stream for one repetition of one cell.
pub fn stream_rng(master: u64, study_id: u64, cell_id: u64, rep: u64) -> ChaCha8Rng {
    let mut h = mix64(master ^ 0x9e3779b97f4a7c15);
    h = mix64(h ^ study_id.wrapping_mul(0xd1b54a32d192ed03));
    h = mix64(h ^ cell_id.wrapping_mul(0x8cb92ba72f3d8dd7));
    h = mix64(h ^ rep.wrapping_mul(0xda942042e4dd58b5));
    let mut seed = [0u8; 32];
    for (j, chunk) in seed.chunks_mut(8).enumerate() {
        let w = mix64(h.wrapping_add(1 + j as u64).wrapping_mul(0x2545f4914f6cdd1d));
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    use rand::SeedableRng;
    ChaCha8Rng::from_seed(seed)
}

/// Run `repetitions` independent replications of `rep_fn` in parallel,
/// reducing in repetition order; errors are collected as failures.
pub(crate) fn run_reps<T, F>(config: &StudyConfig, cell_id: u64, rep_fn: F) -> (Vec<T>, usize)
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let outcomes: Vec<Result<T>> = (0..config.repetitions as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(config.seed, config.study.id(), cell_id, rep);
            rep_fn(&mut rng)
        })
        .collect();
    let mut values = Vec::with_capacity(outcomes.len());
    let mut failures = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok(v) => values.push(v),
            Err(_) => failures += 1,
        }
    }
    (values, failures)
}

pub(crate) fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub(crate) fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Normal-approximation standard error of a sample median.
pub(crate) fn median_se(values: &[f64]) -> f64 {
    1.2533 * sample_sd(values) / (values.len() as f64).sqrt()
}

pub(crate) fn binomial_se(p_hat: f64, n: usize) -> f64 {
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

/// Cubic-Hermite interpolant of a fixed CDF on a uniform grid, with the
/// density supplying exact endpoint slopes. Absolute accuracy is far below
/// importance-weight resolution (see the unit test); built once per study
/// cell and shared across repetitions to keep incomplete-beta evaluations out
/// of the weight loop.
pub(crate) struct CdfTable {
    lo: f64,
    step: f64,
    /// (value, derivative) at each node.
    nodes: Vec<(f64, f64)>,
}

impl CdfTable {
    pub(crate) fn new<C, D>(cdf: C, pdf: D, lo: f64, hi: f64, intervals: usize) -> Self
    where
        C: Fn(f64) -> f64,
        D: Fn(f64) -> f64,
    {
        let step = (hi - lo) / intervals as f64;
        let nodes = (0..=intervals)
            .map(|i| {
                let x = lo + i as f64 * step;
                (cdf(x), pdf(x))
            })
            .collect();
        CdfTable { lo, step, nodes }
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        let f = (x - self.lo) / self.step;
        if f <= 0.0 {
            return self.nodes[0].0;
        }
        let last = self.nodes.len() - 1;
        if f >= last as f64 {
            return self.nodes[last].0;
        }
        let i = f as usize;
        let t = f - i as f64;
        let (y0, d0) = self.nodes[i];
        let (y1, d1) = self.nodes[i + 1];
        let h = self.step;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1
    }
}

/// Write the study's CSV outputs and JSON manifest into `dir`; returns the
/// paths written. Identical configurations and seeds produce byte-identical
/// CSVs regardless of thread count.
pub fn write_outputs(result: &StudyResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let table_path = dir.join(match result.study {
        StudyKind::TauRetention => "tau_retention.csv",
        StudyKind::MultinomialCoverage => "coverage_multinomial.csv",
        StudyKind::GammaCoverage => "coverage_gamma.csv",
        StudyKind::ModeConvergence => "mode_convergence.csv",
        StudyKind::RegressionCoverage => "regression_coverage.csv",
    });
    let mut w = csv::Writer::from_path(&table_path)?;
    match result.study {
        StudyKind::TauRetention => {
            w.write_record(["n", "min", "median", "max"])?;
            for cell in &result.cells {
                w.write_record([
                    cell.sample_size.to_string(),
                    fmt(cell.extra["min_tau"]),
                    fmt(cell.estimate),
                    fmt(cell.extra["max_tau"]),
                ])?;
            }
        }
        StudyKind::MultinomialCoverage | StudyKind::GammaCoverage => {
            // Long format for the coverage figures: x = analysis rho.
            w.write_record(["x", "y", "series"])?;
            for cell in &result.cells {
                w.write_record([
                    fmt(cell.rho.unwrap_or(f64::NAN)),
                    fmt(cell.estimate),
                    format!("n={}", cell.sample_size),
                ])?;
            }
        }
        StudyKind::ModeConvergence => {
            // Long format: x = sample size, one series per case/statistic.
            w.write_record(["x", "y", "series"])?;
            for cell in &result.cells {
                w.write_record([
                    cell.sample_size.to_string(),
                    fmt(cell.estimate),
                    format!("case{}:{}", cell.case.unwrap_or(0), cell.statistic),
                ])?;
            }
        }
        StudyKind::RegressionCoverage => {
            w.write_record(["case", "prior", "n", "coverage", "median_area"])?;
            for cell in &result.cells {
                w.write_record([
                    cell.case.unwrap_or(0).to_string(),
                    cell.prior.clone().unwrap_or_default(),
                    cell.sample_size.to_string(),
                    fmt(cell.estimate),
                    fmt(cell.extra["median_area"]),
                ])?;
            }
        }
    }
    w.flush()?;
    written.push(table_path);

    // Full per-cell detail in long format.
    let cells_path = dir.join("cells.csv");
    let mut w = csv::Writer::from_path(&cells_path)?;
    w.write_record([
        "cell_id",
        "sample_size",
        "rho",
        "case",
        "prior",
        "statistic",
        "estimate",
        "mc_se",
        "repetitions",
        "failures",
        "reference",
        "se_units_from_reference",
    ])?;
    for cell in &result.cells {
        w.write_record([
            cell.cell_id.to_string(),
            cell.sample_size.to_string(),
            cell.rho.map(fmt).unwrap_or_default(),
            cell.case.map(|c| c.to_string()).unwrap_or_default(),
            cell.prior.clone().unwrap_or_default(),
            cell.statistic.clone(),
            fmt(cell.estimate),
            fmt(cell.mc_se),
            cell.repetitions.to_string(),
            cell.failures.to_string(),
            cell.reference.map(fmt).unwrap_or_default(),
            cell.se_units_from_reference.map(fmt).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    written.push(cells_path);

    let manifest_path = dir.join("manifest.json");
    let mut file = std::fs::File::create(&manifest_path)?;
    serde_json::to_writer_pretty(&mut file, &result.manifest)?;
    file.write_all(b"\n")?;
    written.push(manifest_path);

    Ok(written)
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}
