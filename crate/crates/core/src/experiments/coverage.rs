//! Credible-set calibration studies: empirical coverage of 95% HPD sets when
//! data are generated from nature's prior predictive and analyzed under a
//! grid of analysis-prior copula correlations.
//!
//! The multinomial variant fixes nature's correlation at -0.9 (a chronically
//! rejected structure); the gamma variant at +0.4 (not chronically rejected),
//! with the Laplace multivariate-t proposal driving the SIR step.

use super::tau_retention::{independence_prior, multinomial_prior};
use super::{binomial_se, run_reps, CellRecord, StudyConfig, StudyKind};
use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::marginal::MarginalPrior;
use crate::model::{prior_predictive_generate, ModelSpec};
use crate::posterior::{conjugate_proposal, hpd_region, kde2d, sir_posterior, GridSpec, PosteriorDensity};
use crate::prior::CopulaPrior;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub(crate) const GAMMA_NATURE_RHO: f64 = 0.4;
const HPD_LEVEL: f64 = 0.95;
const DEFAULT_SAMPLE_SIZES: [u64; 2] = [10, 1_000];
const DEFAULT_MULTINOMIAL_RHOS: [f64; 7] = [-0.95, -0.9, -0.75, -0.5, 0.0, 0.5, 0.9];
const DEFAULT_GAMMA_RHOS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 0.95];

pub(crate) fn gamma_marginals() -> Vec<MarginalPrior> {
    vec![
        MarginalPrior::gamma(1000.0, 5000.0).expect("valid parameters"),
        MarginalPrior::gamma(1000.0, 800.0).expect("valid parameters"),
    ]
}

pub(crate) fn gamma_prior(rho: f64) -> Result<CopulaPrior> {
    let copula = if rho == 0.0 {
        CopulaSpec::independence(2)?
    } else {
        CopulaSpec::gaussian_bivariate(rho)?
    };
    CopulaPrior::new(gamma_marginals(), copula)
}

fn gamma_independence_prior() -> Result<CopulaPrior> {
    CopulaPrior::new(gamma_marginals(), CopulaSpec::independence(2)?)
}

/// One multinomial repetition: returns whether the 95% HPD set of the SIR
/// posterior under the given analysis prior contains the generating truth.
fn multinomial_rep(
    config: &StudyConfig,
    analysis_rho: f64,
    n: u64,
    tables: &(super::CdfTable, super::CdfTable),
    rng: &mut ChaCha8Rng,
) -> Result<bool> {
    let model = ModelSpec::MultinomialConditional { categories: 3 };
    let nature = multinomial_prior(super::tau_retention::NATURE_RHO)?;
    let (theta0, data) = prior_predictive_generate(&model, &nature, n, rng)?;
    let proposal = conjugate_proposal(&model, &independence_prior()?, &data)?;
    let analysis_copula = multinomial_prior(analysis_rho)?.copula().clone();
    let prop_for_target = proposal.clone();
    let target = move |theta: &nalgebra::DVector<f64>| -> f64 {
        if theta.iter().any(|&z| !(z > 0.0 && z < 1.0)) {
            return f64::NEG_INFINITY;
        }
        let u = [
            tables.0.eval(theta[0]).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0),
            tables.1.eval(theta[1]).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0),
        ];
        match analysis_copula.log_density(&u) {
            Ok(c) => c + prop_for_target.log_pdf(theta),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let sample = sir_posterior(target, &proposal, config.sir_sizes(), rng)?;
    let surface = kde2d(&sample.draws, &GridSpec::default(), None)?;
    let hpd = hpd_region(&surface, HPD_LEVEL, Some(&[theta0[0], theta0[1]]), 0, rng)?;
    Ok(hpd.contains_target)
}

/// One gamma repetition with the Laplace-proposal SIR.
fn gamma_rep(
    config: &StudyConfig,
    analysis_rho: f64,
    n: u64,
    rng: &mut ChaCha8Rng,
) -> Result<bool> {
    let model = ModelSpec::GammaShapeRate;
    let nature = gamma_prior(GAMMA_NATURE_RHO)?;
    let (theta0, data) = prior_predictive_generate(&model, &nature, n, rng)?;
    let proposal = conjugate_proposal(&model, &gamma_independence_prior()?, &data)?;
    let analysis = gamma_prior(analysis_rho)?;
    let posterior = PosteriorDensity::new(&model, &analysis, &data);
    let sample =
        sir_posterior(|theta| posterior.log_pdf(theta.as_slice()), &proposal, config.sir_sizes(), rng)?;
    let surface = kde2d(&sample.draws, &GridSpec::default(), None)?;
    let hpd = hpd_region(&surface, HPD_LEVEL, Some(&[theta0[0], theta0[1]]), 0, rng)?;
    Ok(hpd.contains_target)
}

pub(super) fn cells(config: &StudyConfig) -> Result<Vec<CellRecord>> {
    let gamma = config.study == StudyKind::GammaCoverage;
    let nature_rho =
        if gamma { GAMMA_NATURE_RHO } else { super::tau_retention::NATURE_RHO };
    let default_rhos: &[f64] =
        if gamma { &DEFAULT_GAMMA_RHOS } else { &DEFAULT_MULTINOMIAL_RHOS };
    let rhos = if config.analysis_rhos.is_empty() {
        default_rhos.to_vec()
    } else {
        config.analysis_rhos.clone()
    };
    let sizes = config.sample_sizes_or(&DEFAULT_SAMPLE_SIZES);
    let tables = super::tau_retention::prior_cdf_tables();

    let mut cells = Vec::with_capacity(rhos.len() * sizes.len());
    let mut cell_id = 0u64;
    for &n in &sizes {
        for &rho in &rhos {
            let (hits, failures) = run_reps(config, cell_id, |rng| {
                if gamma {
                    gamma_rep(config, rho, n, rng)
                } else {
                    multinomial_rep(config, rho, n, &tables, rng)
                }
            });
            if hits.is_empty() {
                return Err(Error::numerical(format!(
                    "every repetition failed in cell (rho={rho}, n={n})"
                )));
            }
            let coverage =
                hits.iter().filter(|&&c| c).count() as f64 / hits.len() as f64;
            let mut record = CellRecord {
                cell_id,
                sample_size: n,
                rho: Some(rho),
                case: None,
                prior: None,
                statistic: "coverage".to_string(),
                estimate: coverage,
                mc_se: binomial_se(coverage, hits.len()),
                repetitions: hits.len(),
                failures,
                reference: None,
                se_units_from_reference: None,
                extra: BTreeMap::new(),
            };
            // At nature's prior the credible sets are calibrated by
            // construction, so the nominal level is the reference.
            if (rho - nature_rho).abs() < 1e-12 {
                record.attach_reference(Some(HPD_LEVEL));
            }
            cells.push(record);
            cell_id += 1;
        }
    }
    Ok(cells)
}

/// Run a coverage study (multinomial or gamma, per the configuration).
pub fn run_coverage(config: &StudyConfig) -> Result<super::StudyResult> {
    if !matches!(config.study, StudyKind::MultinomialCoverage | StudyKind::GammaCoverage) {
        return Err(Error::Config("configuration is not a coverage study".into()));
    }
    super::run_study(config)
}
