//! Config-file schemas: the study configuration from the core crate plus the
//! diagnostic and copula-inspection specs, with strict unknown-key checking.

use anyhow::{anyhow, bail, Context, Result};
use copula_lab::copula::{archimedean_param_to_tau, rho_to_tau, CopulaSpec};
use copula_lab::diagnostics::SupportProbe;
use copula_lab::experiments::{StudyConfig, StudyKind};
use copula_lab::marginal::MarginalPrior;
use copula_lab::model::ModelSpec;
use copula_lab::prior::CopulaPrior;
use copula_lab::vine::DVine;
use nalgebra::DMatrix;
use serde::Deserialize;
use std::path::Path;

/// Any parsed configuration.
pub enum ParsedConfig {
    Study(StudyConfig),
    Diagnose(Box<DiagnoseSpec>),
    CopulaInspect(CopulaInspectSpec),
}

/// CLI-level overrides applied after parsing.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub repetitions: Option<usize>,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaConfig {
    pub family: String,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub dof: Option<f64>,
    #[serde(default)]
    pub param: Option<f64>,
    /// Row-major correlation matrix for elliptical copulas above 2 variables.
    #[serde(default)]
    pub correlation: Option<Vec<Vec<f64>>>,
}

impl CopulaConfig {
    pub fn build(&self) -> Result<CopulaSpec> {
        let spec = match self.family.as_str() {
            "independence" => CopulaSpec::independence(self.dim.unwrap_or(2))?,
            "gaussian" => match (&self.correlation, self.rho) {
                (Some(rows), _) => CopulaSpec::gaussian(matrix_from_rows(rows)?)?,
                (None, Some(rho)) => CopulaSpec::gaussian_bivariate(rho)?,
                _ => bail!("copula.rho or copula.correlation required for the gaussian family"),
            },
            "student-t" => {
                let dof = self.dof.ok_or_else(|| anyhow!("copula.dof required for student-t"))?;
                match (&self.correlation, self.rho) {
                    (Some(rows), _) => CopulaSpec::student_t(matrix_from_rows(rows)?, dof)?,
                    (None, Some(rho)) => CopulaSpec::student_t_bivariate(rho, dof)?,
                    _ => bail!("copula.rho or copula.correlation required for student-t"),
                }
            }
            "clayton" => CopulaSpec::clayton(
                self.param.ok_or_else(|| anyhow!("copula.param required for clayton"))?,
            )?,
            "gumbel" => CopulaSpec::gumbel(
                self.param.ok_or_else(|| anyhow!("copula.param required for gumbel"))?,
            )?,
            "frank" => CopulaSpec::frank(
                self.param.ok_or_else(|| anyhow!("copula.param required for frank"))?,
            )?,
            other => bail!("copula.family: unknown family '{other}'"),
        };
        Ok(spec)
    }
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        bail!("copula.correlation must be a square matrix");
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: String,
    #[serde(default)]
    pub categories: Option<usize>,
    #[serde(default)]
    pub noise_variance: Option<f64>,
    #[serde(default)]
    pub covariates: Option<usize>,
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        let model = match self.kind.as_str() {
            "multinomial-conditional" => ModelSpec::MultinomialConditional {
                categories: self
                    .categories
                    .ok_or_else(|| anyhow!("model.categories required for the multinomial"))?,
            },
            "normal-mean-var" => ModelSpec::NormalMeanVar,
            "gamma-shape-rate" => ModelSpec::GammaShapeRate,
            "lin-reg-known-var" => ModelSpec::LinRegKnownVar {
                noise_variance: self
                    .noise_variance
                    .ok_or_else(|| anyhow!("model.noise_variance required for regression"))?,
                covariates: self
                    .covariates
                    .ok_or_else(|| anyhow!("model.covariates required for regression"))?,
            },
            other => bail!("model.kind: unknown kind '{other}'"),
        };
        model.validate()?;
        Ok(model)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub marginals: Vec<MarginalPrior>,
    pub copula: CopulaConfig,
    /// Optional explicit edge taus (canonical D-vine order) overriding the
    /// taus induced by the prior copula.
    #[serde(default)]
    pub vine_taus: Option<Vec<f64>>,
}

impl PriorConfig {
    pub fn build(&self) -> Result<CopulaPrior> {
        Ok(CopulaPrior::new(self.marginals.clone(), self.copula.build()?)?)
    }

    /// The prior's D-vine tau structure: explicit taus when given, otherwise
    /// induced from the copula parameters.
    pub fn vine(&self) -> Result<DVine> {
        let dim = self.marginals.len();
        if let Some(taus) = &self.vine_taus {
            return Ok(DVine::with_taus(dim, taus)?);
        }
        let spec = self.copula.build()?;
        match self.copula.family.as_str() {
            "independence" => Ok(DVine::independent(dim)?),
            "gaussian" | "student-t" => {
                if dim == 2 {
                    let rho = self.copula.rho.ok_or_else(|| anyhow!("copula.rho required"))?;
                    Ok(DVine::bivariate(rho_to_tau(rho)?)?)
                } else {
                    // Partial-correlation taus induced by the correlation
                    // matrix itself.
                    let rows = self
                        .copula
                        .correlation
                        .as_ref()
                        .ok_or_else(|| anyhow!("copula.correlation required above 2 variables"))?;
                    let sigma = matrix_from_rows(rows)?;
                    let vine = DVine::independent(dim)?;
                    let induced = copula_lab::diagnostics::induced_tau(&sigma, &vine)?;
                    let taus: Vec<f64> = induced.taus.iter().map(|(_, t)| *t).collect();
                    Ok(DVine::with_taus(dim, &taus)?)
                }
            }
            "clayton" | "gumbel" | "frank" => {
                let family = spec.family();
                let param =
                    self.copula.param.ok_or_else(|| anyhow!("copula.param required"))?;
                Ok(DVine::bivariate(archimedean_param_to_tau(family, param)?)?)
            }
            other => bail!("copula.family: unknown family '{other}'"),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub kind: String,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub lower: Option<Vec<f64>>,
    #[serde(default)]
    pub upper: Option<Vec<f64>>,
    #[serde(default)]
    pub per_dim: Option<usize>,
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
}

impl ProbeConfig {
    pub fn build(&self, design_prior: &PriorConfig) -> Result<SupportProbe> {
        match self.kind.as_str() {
            "prior-sample" => Ok(SupportProbe::PriorSample {
                prior: design_prior.build()?,
                count: self.count.unwrap_or(copula_lab::diagnostics::DEFAULT_PROBE_DRAWS),
            }),
            "grid" => Ok(SupportProbe::Grid {
                lower: self.lower.clone().ok_or_else(|| anyhow!("probe.lower required"))?,
                upper: self.upper.clone().ok_or_else(|| anyhow!("probe.upper required"))?,
                per_dim: self.per_dim.unwrap_or(8),
            }),
            "explicit" => Ok(SupportProbe::Explicit(
                self.points.clone().ok_or_else(|| anyhow!("probe.points required"))?,
            )),
            other => bail!("probe.kind: unknown kind '{other}'"),
        }
    }
}

fn default_probe() -> ProbeConfig {
    ProbeConfig {
        kind: "prior-sample".to_string(),
        count: None,
        lower: None,
        upper: None,
        per_dim: None,
        points: None,
    }
}

fn default_tolerance() -> f64 {
    copula_lab::diagnostics::DEFAULT_TAU_TOLERANCE
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseSpec {
    #[allow(dead_code)]
    pub study: String,
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub model: ModelConfig,
    pub prior: PriorConfig,
    #[serde(default = "default_probe")]
    pub probe: ProbeConfig,
}

fn default_grid() -> usize {
    101
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaInspectSpec {
    #[allow(dead_code)]
    pub study: String,
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub copula_one: CopulaConfig,
    pub copula_two: CopulaConfig,
}

/// Parse and validate a config file for the given subcommand, applying
/// overrides. In strict mode unknown keys are rejected; lenient mode ignores
/// them.
pub fn parse_config(
    path: &Path,
    subcommand: &str,
    overrides: &Overrides,
    strict: bool,
) -> Result<ParsedConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let table: toml::Table = toml::from_str(&text)
        .with_context(|| format!("parsing {} as TOML", path.display()))?;
    let value = toml::Value::Table(table);
    let study_field = value
        .get("study")
        .and_then(|v| v.as_str())
        .ok_or_else(|| anyhow!("config must declare its 'study'"))?
        .to_string();
    if study_field != subcommand {
        bail!(
            "config declares study '{study_field}' but the '{subcommand}' subcommand was invoked"
        );
    }

    match subcommand {
        "diagnose" => {
            let allowed = ["study", "seed", "tolerance", "model", "prior", "probe"];
            let spec: DiagnoseSpec = deserialize(value, strict, &allowed)?;
            if !spec.tolerance.is_finite() || spec.tolerance <= 0.0 {
                bail!("tolerance: must be positive");
            }
            let mut spec = spec;
            if let Some(seed) = overrides.seed {
                spec.seed = seed;
            }
            // Validate the parts eagerly so errors carry field names.
            spec.model.build()?;
            spec.prior.build()?;
            spec.prior.vine()?;
            Ok(ParsedConfig::Diagnose(Box::new(spec)))
        }
        "copula-inspect" => {
            let allowed = ["study", "grid", "copula_one", "copula_two"];
            let spec: CopulaInspectSpec = deserialize(value, strict, &allowed)?;
            spec.copula_one.build()?;
            spec.copula_two.build()?;
            if spec.grid < 2 {
                bail!("grid: must be at least 2");
            }
            Ok(ParsedConfig::CopulaInspect(spec))
        }
        _ => {
            let kind = study_kind_for(subcommand)?;
            let allowed = [
                "study",
                "seed",
                "repetitions",
                "sample_sizes",
                "analysis_rhos",
                "cases",
                "proposal_size",
                "resample_size",
                "systematic_resampling",
                "qmc_points",
                "threads",
            ];
            let mut cfg: StudyConfig = deserialize(value, strict, &allowed)?;
            if cfg.study != kind {
                bail!("study '{study_field}' does not match subcommand '{subcommand}'");
            }
            if let Some(seed) = overrides.seed {
                cfg.seed = seed;
            }
            if let Some(reps) = overrides.repetitions {
                cfg.repetitions = reps;
            }
            if let Some(threads) = overrides.threads {
                cfg.threads = Some(threads);
            }
            cfg.validate()?;
            Ok(ParsedConfig::Study(cfg))
        }
    }
}

fn deserialize<T: serde::de::DeserializeOwned>(
    value: toml::Value,
    strict: bool,
    allowed_top_keys: &[&str],
) -> Result<T> {
    if strict {
        if let toml::Value::Table(table) = &value {
            for key in table.keys() {
                if !allowed_top_keys.contains(&key.as_str()) {
                    bail!("unknown key '{key}' (strict mode; pass --lenient to ignore)");
                }
            }
        }
    }
    T::deserialize(value).map_err(|e| anyhow!("config error: {e}"))
}

fn study_kind_for(subcommand: &str) -> Result<StudyKind> {
    Ok(match subcommand {
        "tau-retention" => StudyKind::TauRetention,
        "coverage" => StudyKind::MultinomialCoverage,
        "gamma-coverage" => StudyKind::GammaCoverage,
        "mode-convergence" => StudyKind::ModeConvergence,
        "regression-coverage" => StudyKind::RegressionCoverage,
        other => bail!("unknown study subcommand '{other}'"),
    })
}
