//! Kendall-tau retention study: how the posterior rank correlation between
//! the two conditional multinomial probabilities decays as data accumulate,
//! when both the data-generating and analysis priors join Beta(20,40) and
//! Beta(30,30) marginals with a Gaussian copula of correlation -0.9.

use super::{median, median_se, run_reps, CellRecord, StudyConfig, StudyKind};
use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::kendall::kendall_tau;
use crate::marginal::MarginalPrior;
use crate::model::{ModelSpec, prior_predictive_generate};
use crate::posterior::{conjugate_proposal, sir_posterior};
use crate::prior::CopulaPrior;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub(crate) const NATURE_RHO: f64 = -0.9;
const DEFAULT_SAMPLE_SIZES: [u64; 5] = [10, 100, 1_000, 10_000, 100_000];

/// Reference medians for the tau-retention table, indexed by sample size.
const REFERENCE_MEDIANS: [(u64, f64); 5] = [
    (10, -0.6806),
    (100, -0.5049),
    (1_000, -0.1611),
    (10_000, -0.0214),
    (100_000, -0.0022),
];

pub(crate) fn beta_marginals() -> Vec<MarginalPrior> {
    vec![
        MarginalPrior::beta(20.0, 40.0).expect("valid parameters"),
        MarginalPrior::beta(30.0, 30.0).expect("valid parameters"),
    ]
}

pub(crate) fn multinomial_prior(rho: f64) -> Result<CopulaPrior> {
    let copula = if rho == 0.0 {
        CopulaSpec::independence(2)?
    } else {
        CopulaSpec::gaussian_bivariate(rho)?
    };
    CopulaPrior::new(beta_marginals(), copula)
}

pub(crate) fn independence_prior() -> Result<CopulaPrior> {
    CopulaPrior::new(beta_marginals(), CopulaSpec::independence(2)?)
}

/// Interpolation tables for the two fixed marginal prior CDFs.
pub(crate) fn prior_cdf_tables() -> (super::CdfTable, super::CdfTable) {
    let marginals = beta_marginals();
    let m0 = marginals[0].clone();
    let m1 = marginals[1].clone();
    (
        super::CdfTable::new(|x| m0.cdf(x), |x| m0.pdf(x), 0.0, 1.0, 4096),
        super::CdfTable::new(|x| m1.cdf(x), |x| m1.pdf(x), 0.0, 1.0, 4096),
    )
}

/// One repetition: draw the truth from the design prior, generate counts,
/// approximate the posterior by SIR from the independence-posterior proposal,
/// and return the posterior Kendall tau of the resampled draws.
pub(crate) fn posterior_tau_rep(
    config: &StudyConfig,
    analysis_rho: f64,
    n: u64,
    tables: &(super::CdfTable, super::CdfTable),
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let model = ModelSpec::MultinomialConditional { categories: 3 };
    let nature = multinomial_prior(NATURE_RHO)?;
    let (_theta0, data) = prior_predictive_generate(&model, &nature, n, rng)?;
    let proposal = conjugate_proposal(&model, &independence_prior()?, &data)?;
    let analysis = multinomial_prior(analysis_rho)?;
    // The independence-posterior proposal cancels the marginal-and-likelihood
    // part of the target exactly, leaving the analysis copula density at the
    // prior CDFs as the importance weight.
    let copula = analysis.copula().clone();
    let prop_for_target = proposal.clone();
    let target = move |theta: &nalgebra::DVector<f64>| -> f64 {
        if theta.iter().any(|&z| !(z > 0.0 && z < 1.0)) {
            return f64::NEG_INFINITY;
        }
        let u = [
            tables.0.eval(theta[0]).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0),
            tables.1.eval(theta[1]).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0),
        ];
        match copula.log_density(&u) {
            Ok(c) => c + prop_for_target.log_pdf(theta),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let sample = sir_posterior(target, &proposal, config.sir_sizes(), rng)?;
    kendall_tau(&sample.column(0), &sample.column(1))
}

pub(super) fn cells(config: &StudyConfig) -> Result<Vec<CellRecord>> {
    let sizes = config.sample_sizes_or(&DEFAULT_SAMPLE_SIZES);
    let tables = prior_cdf_tables();
    let mut cells = Vec::with_capacity(sizes.len());
    for (cell_id, &n) in sizes.iter().enumerate() {
        let (mut taus, failures) = run_reps(config, cell_id as u64, |rng| {
            posterior_tau_rep(config, NATURE_RHO, n, &tables, rng)
        });
        if taus.is_empty() {
            return Err(Error::numerical(format!("every repetition failed in cell n={n}")));
        }
        taus.sort_by(f64::total_cmp);
        let mut extra = BTreeMap::new();
        extra.insert("min_tau".to_string(), taus[0]);
        extra.insert("max_tau".to_string(), *taus.last().unwrap());
        let mut record = CellRecord {
            cell_id: cell_id as u64,
            sample_size: n,
            rho: Some(NATURE_RHO),
            case: None,
            prior: None,
            statistic: "median_tau".to_string(),
            estimate: median(&taus),
            mc_se: median_se(&taus),
            repetitions: taus.len(),
            failures,
            reference: None,
            se_units_from_reference: None,
            extra,
        };
        record.attach_reference(
            REFERENCE_MEDIANS.iter().find(|(size, _)| *size == n).map(|(_, v)| *v),
        );
        cells.push(record);
    }
    Ok(cells)
}

/// Run the full tau-retention study.
pub fn run_tau_retention(config: &StudyConfig) -> Result<super::StudyResult> {
    if config.study != StudyKind::TauRetention {
        return Err(Error::Config("configuration is not a tau-retention study".into()));
    }
    super::run_study(config)
}
