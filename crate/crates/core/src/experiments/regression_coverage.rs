//! Regression coverage study: empirical coverage and median area of 95% HPD
//! sets for the two-covariate regression posterior under the independence and
//! t-copula priors, across the six data-generating cases.

use super::mode_convergence::{
    case_theta0, independence_regression_prior, normal_marginals, regression_model,
    t_copula_regression_prior,
};
use super::{binomial_se, median, median_se, run_reps, CellRecord, StudyConfig, StudyKind};
use crate::error::{Error, Result};
use crate::posterior::{conjugate_proposal, hpd_region, kde2d, sir_posterior, GridSpec};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

const HPD_LEVEL: f64 = 0.95;
const DEFAULT_SAMPLE_SIZES: [u64; 3] = [10, 100, 1_000];

#[derive(Clone, Copy, PartialEq, Eq)]
enum PriorChoice {
    Independence,
    TCopula,
}

impl PriorChoice {
    fn label(self) -> &'static str {
        match self {
            PriorChoice::Independence => "independence",
            PriorChoice::TCopula => "t-copula",
        }
    }
}

/// Reference (coverage, median area) values for selected cells, keyed by
/// (case, prior label, sample size).
const REFERENCES: [(usize, &str, u64, f64, f64); 4] = [
    (6, "independence", 10, 0.0023, 6.8552),
    (6, "t-copula", 10, 0.0002, 4.7521),
    (1, "independence", 100_000, 0.9546, 0.0010),
    (1, "t-copula", 100_000, 0.9539, 0.0010),
];

/// One repetition: SIR posterior from the exact normal proposal, 95% HPD set
/// from the KDE surface, containment of the truth, and the region's area.
fn coverage_rep(
    config: &StudyConfig,
    case: usize,
    prior_choice: PriorChoice,
    n: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(bool, f64)> {
    let model = regression_model();
    let theta0 = case_theta0(case)?;
    let data = model.generate_data(theta0.as_slice(), n, rng)?;
    let proposal = conjugate_proposal(&model, &independence_regression_prior()?, &data)?;
    // The normal proposal is the exact posterior under the independence
    // prior; the t-copula target differs only by the copula factor at the
    // marginal CDFs.
    let sample = match prior_choice {
        PriorChoice::Independence => {
            let prop_for_target = proposal.clone();
            sir_posterior(
                move |theta| prop_for_target.log_pdf(theta),
                &proposal,
                config.sir_sizes(),
                rng,
            )?
        }
        PriorChoice::TCopula => {
            let copula = t_copula_regression_prior()?.copula().clone();
            let marginals = normal_marginals();
            let prop_for_target = proposal.clone();
            let target = move |theta: &nalgebra::DVector<f64>| -> f64 {
                let u = [
                    marginals[0].cdf(theta[0]).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0),
                    marginals[1].cdf(theta[1]).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0),
                ];
                match copula.log_density(&u) {
                    Ok(c) => c + prop_for_target.log_pdf(theta),
                    Err(_) => f64::NEG_INFINITY,
                }
            };
            sir_posterior(target, &proposal, config.sir_sizes(), rng)?
        }
    };
    let surface = kde2d(&sample.draws, &GridSpec::default(), None)?;
    let hpd = hpd_region(
        &surface,
        HPD_LEVEL,
        Some(&[theta0[0], theta0[1]]),
        config.qmc_points,
        rng,
    )?;
    Ok((hpd.contains_target, hpd.area))
}

pub(super) fn cells(config: &StudyConfig) -> Result<Vec<CellRecord>> {
    let cases = config.cases_or_all();
    let sizes = config.sample_sizes_or(&DEFAULT_SAMPLE_SIZES);
    let mut cells = Vec::new();
    let mut cell_id = 0u64;
    for &case in &cases {
        for prior_choice in [PriorChoice::Independence, PriorChoice::TCopula] {
            for &n in &sizes {
                let (outcomes, failures) = run_reps(config, cell_id, |rng| {
                    coverage_rep(config, case, prior_choice, n, rng)
                });
                if outcomes.is_empty() {
                    return Err(Error::numerical(format!(
                        "every repetition failed in cell (case={case}, prior={}, n={n})",
                        prior_choice.label()
                    )));
                }
                let reps = outcomes.len();
                let coverage =
                    outcomes.iter().filter(|&&(hit, _)| hit).count() as f64 / reps as f64;
                let mut areas: Vec<f64> = outcomes.iter().map(|&(_, a)| a).collect();
                areas.sort_by(f64::total_cmp);
                let mut extra = BTreeMap::new();
                extra.insert("median_area".to_string(), median(&areas));
                extra.insert("median_area_se".to_string(), median_se(&areas));
                let mut record = CellRecord {
                    cell_id,
                    sample_size: n,
                    rho: None,
                    case: Some(case),
                    prior: Some(prior_choice.label().to_string()),
                    statistic: "coverage".to_string(),
                    estimate: coverage,
                    mc_se: binomial_se(coverage, reps),
                    repetitions: reps,
                    failures,
                    reference: None,
                    se_units_from_reference: None,
                    extra,
                };
                if let Some(&(_, _, _, cov_ref, area_ref)) = REFERENCES
                    .iter()
                    .find(|(c, p, size, _, _)| *c == case && *p == prior_choice.label() && *size == n)
                {
                    record.attach_reference(Some(cov_ref));
                    record.extra.insert("reference_median_area".to_string(), area_ref);
                }
                cells.push(record);
                cell_id += 1;
            }
        }
    }
    Ok(cells)
}

/// Run the regression coverage study.
pub fn run_regression_coverage(config: &StudyConfig) -> Result<super::StudyResult> {
    if config.study != StudyKind::RegressionCoverage {
        return Err(Error::Config("configuration is not a regression-coverage study".into()));
    }
    super::run_study(config)
}
