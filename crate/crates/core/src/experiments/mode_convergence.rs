//! Posterior-mode convergence study: for six data-generating parameter
//! values, compare the modes under an independence-copula prior and a
//! Student-t(4) copula prior on the same standard-normal marginals, tracking
//! the probability that the t-copula mode lands closer to the truth and the
//! mean absolute distance difference.

use super::{binomial_se, run_reps, sample_sd, CellRecord, StudyConfig, StudyKind};
use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::marginal::MarginalPrior;
use crate::model::ModelSpec;
use crate::posterior::{posterior_mode, NewtonOptions, PosteriorDensity};
use crate::prior::CopulaPrior;
use crate::special::{normal_quantile, student_t_cdf};
use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub(crate) const NOISE_VARIANCE: f64 = 5.0;
const DEFAULT_SAMPLE_SIZES: [u64; 4] = [10, 100, 1_000, 10_000];

/// Tabulated reference values for the probability that the t-copula mode is
/// closer, for the cells where one is known.
const REFERENCE_PROBS: [(usize, u64, f64); 2] = [(3, 100_000, 0.563), (2, 100_000, 0.673)];

pub(crate) fn regression_model() -> ModelSpec {
    ModelSpec::LinRegKnownVar { noise_variance: NOISE_VARIANCE, covariates: 2 }
}

pub(crate) fn normal_marginals() -> Vec<MarginalPrior> {
    vec![
        MarginalPrior::normal(0.0, 1.0).expect("valid parameters"),
        MarginalPrior::normal(0.0, 1.0).expect("valid parameters"),
    ]
}

pub(crate) fn independence_regression_prior() -> Result<CopulaPrior> {
    CopulaPrior::new(normal_marginals(), CopulaSpec::independence(2)?)
}

pub(crate) fn t_copula_regression_prior() -> Result<CopulaPrior> {
    CopulaPrior::new(normal_marginals(), CopulaSpec::student_t_bivariate(0.0, 4.0)?)
}

/// Data-generating parameter for each of the six cases. Cases 1-5 are
/// defined by their u-coordinates under the standard-normal marginals:
/// the t-copula ratio's local maximum, a near-maximum point, the diagonal
/// saddle, and two off-diagonal points; case 6 is the extreme (-5, 8).
pub(crate) fn case_theta0(case: usize) -> Result<DVector<f64>> {
    let q = |p: f64| normal_quantile(p);
    Ok(match case {
        1 => DVector::from_vec(vec![0.0, 0.0]),
        2 => {
            let v = q(0.495)?;
            DVector::from_vec(vec![v, v])
        }
        3 => {
            let u = student_t_cdf(1.0, 4.0);
            let v = q(u)?;
            DVector::from_vec(vec![v, v])
        }
        4 => DVector::from_vec(vec![0.0, q(0.99)?]),
        5 => DVector::from_vec(vec![q(0.85)?, q(0.9)?]),
        6 => DVector::from_vec(vec![-5.0, 8.0]),
        other => return Err(Error::argument(format!("case {other} outside 1..=6"))),
    })
}

/// One repetition: both posterior modes and their distances to the truth.
pub(crate) fn mode_pair_rep(
    case: usize,
    n: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64)> {
    let model = regression_model();
    let theta0 = case_theta0(case)?;
    let data = model.generate_data(theta0.as_slice(), n, rng)?;
    let prior1 = independence_regression_prior()?;
    let prior2 = t_copula_regression_prior()?;
    let post1 = PosteriorDensity::new(&model, &prior1, &data);
    let post2 = PosteriorDensity::new(&model, &prior2, &data);
    let start = model.mle(&data)?.unwrap_or_else(|| DVector::zeros(2));
    let mode1 = posterior_mode(&post1, &start, NewtonOptions::default())?;
    let mode2 = posterior_mode(&post2, &mode1.location, NewtonOptions::default())?;
    let d1 = (&mode1.location - &theta0).norm();
    let d2 = (&mode2.location - &theta0).norm();
    Ok((d1, d2))
}

pub(super) fn cells(config: &StudyConfig) -> Result<Vec<CellRecord>> {
    let cases = config.cases_or_all();
    let sizes = config.sample_sizes_or(&DEFAULT_SAMPLE_SIZES);
    let mut cells = Vec::with_capacity(2 * cases.len() * sizes.len());
    let mut cell_id = 0u64;
    for &case in &cases {
        for &n in &sizes {
            let (pairs, failures) =
                run_reps(config, cell_id, |rng| mode_pair_rep(case, n, rng));
            if pairs.is_empty() {
                return Err(Error::numerical(format!(
                    "every repetition failed in cell (case={case}, n={n})"
                )));
            }
            let reps = pairs.len();
            let p_closer =
                pairs.iter().filter(|&&(d1, d2)| d2 <= d1).count() as f64 / reps as f64;
            let diffs: Vec<f64> = pairs.iter().map(|&(d1, d2)| (d2 - d1).abs()).collect();
            let mean_diff = diffs.iter().sum::<f64>() / reps as f64;
            let mut prob_record = CellRecord {
                cell_id,
                sample_size: n,
                rho: None,
                case: Some(case),
                prior: None,
                statistic: "pr_second_closer".to_string(),
                estimate: p_closer,
                mc_se: binomial_se(p_closer, reps),
                repetitions: reps,
                failures,
                reference: None,
                se_units_from_reference: None,
                extra: BTreeMap::new(),
            };
            prob_record.attach_reference(
                REFERENCE_PROBS
                    .iter()
                    .find(|(c, size, _)| *c == case && *size == n)
                    .map(|(_, _, v)| *v),
            );
            cells.push(prob_record);
            cells.push(CellRecord {
                cell_id,
                sample_size: n,
                rho: None,
                case: Some(case),
                prior: None,
                statistic: "mean_abs_diff".to_string(),
                estimate: mean_diff,
                mc_se: sample_sd(&diffs) / (reps as f64).sqrt(),
                repetitions: reps,
                failures,
                reference: None,
                se_units_from_reference: None,
                extra: BTreeMap::new(),
            });
            cell_id += 1;
        }
    }
    Ok(cells)
}

/// Run the mode-convergence study.
pub fn run_mode_convergence(config: &StudyConfig) -> Result<super::StudyResult> {
    if config.study != StudyKind::ModeConvergence {
        return Err(Error::Config("configuration is not a mode-convergence study".into()));
    }
    super::run_study(config)
}
