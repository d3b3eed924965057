//! Per-unit-observation Fisher information: analytic inverses where the model
//! admits them and a Monte Carlo oracle for cross-validation.

use crate::error::{Error, Result};
use crate::model::{ModelSpec, Observation};
use crate::special::trigamma;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Analytic inverse Fisher information per unit observation at `theta0`.
///
/// The exponential-pair model has no analytic form here; use
/// [`numeric_fisher_oracle`] for it.
pub fn inverse_fisher(model: &ModelSpec, theta0: &[f64]) -> Result<DMatrix<f64>> {
    if !model.contains_interior(theta0) {
        return Err(Error::domain(format!(
            "inverse Fisher information requires an interior parameter, got {theta0:?}"
        )));
    }
    match model {
        ModelSpec::MultinomialConditional { categories } => {
            let w = *categories;
            let mut inv = DMatrix::zeros(w - 1, w - 1);
            // Diagonal entries Z_v (1 - Z_v) / Pr(category >= v); the
            // off-diagonals vanish for every interior parameter.
            let mut not_yet_assigned = 1.0;
            for v in 0..(w - 1) {
                let z = theta0[v];
                inv[(v, v)] = z * (1.0 - z) / not_yet_assigned;
                not_yet_assigned *= 1.0 - z;
            }
            Ok(inv)
        }
        ModelSpec::NormalMeanVar => {
            let var = theta0[1];
            Ok(DMatrix::from_diagonal(&DVector::from_vec(vec![var, 2.0 * var * var])))
        }
        ModelSpec::GammaShapeRate => {
            let (a, b) = (theta0[0], theta0[1]);
            let psi1 = trigamma(a);
            let det = (a * psi1 - 1.0) / (b * b);
            if det <= 0.0 {
                return Err(Error::numerical("singular gamma Fisher information"));
            }
            let mut inv = DMatrix::zeros(2, 2);
            inv[(0, 0)] = (a / (b * b)) / det;
            inv[(0, 1)] = (1.0 / b) / det;
            inv[(1, 0)] = inv[(0, 1)];
            inv[(1, 1)] = psi1 / det;
            Ok(inv)
        }
        ModelSpec::LinRegKnownVar { noise_variance, covariates } => {
            // Standard-normal covariates: E[x x'] is the identity.
            Ok(DMatrix::identity(*covariates, *covariates) * *noise_variance)
        }
        ModelSpec::ExpPairCopula { .. } => Err(Error::Unsupported(
            "the exponential-pair model has no analytic Fisher information; use the numeric oracle"
                .into(),
        )),
    }
}

/// Pearson correlation between the gamma model's shape and rate implied by
/// the inverse Fisher information: `1 / sqrt(alpha * psi_1(alpha))`, a
/// positive and increasing function of the shape.
pub fn gamma_shape_rate_correlation(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("shape must be positive, got {alpha}")));
    }
    Ok(1.0 / (alpha * trigamma(alpha)).sqrt())
}

/// Estimation method for the Monte Carlo Fisher oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FisherMethod {
    /// Average the negated finite-difference Hessians of the per-observation
    /// log-density over Monte Carlo draws.
    HessianExpectation,
    /// Covariance of finite-difference scores over Monte Carlo draws.
    ScoreCovariance,
}

/// Monte Carlo estimate of the per-unit Fisher information and its inverse.
#[derive(Clone, Debug)]
pub struct FisherEstimate {
    pub information: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// Entrywise Monte Carlo standard errors of `information`.
    pub standard_error: DMatrix<f64>,
    pub draws: usize,
    pub condition_number: f64,
}

const MAX_CONDITION: f64 = 1e10;

/// Numeric Fisher oracle: estimates `I(theta0)` per unit observation from
/// `draws` Monte Carlo observations, differentiating only the per-observation
/// log-density (independent of the analytic formulas it validates).
pub fn numeric_fisher_oracle<R: Rng + ?Sized>(
    model: &ModelSpec,
    theta0: &[f64],
    method: FisherMethod,
    draws: usize,
    rng: &mut R,
) -> Result<FisherEstimate> {
    if !model.contains_interior(theta0) {
        return Err(Error::domain("numeric Fisher oracle requires an interior parameter"));
    }
    if draws < 100 {
        return Err(Error::argument("numeric Fisher oracle needs at least 100 draws"));
    }
    let d = model.dim();
    let steps: Vec<f64> = theta0.iter().map(|t| 1e-5 * t.abs().max(1.0)).collect();

    let mut mean = DMatrix::zeros(d, d);
    let mut mean_sq = DMatrix::zeros(d, d);
    for _ in 0..draws {
        let obs = model.sample_observation(theta0, rng)?;
        let term = match method {
            FisherMethod::HessianExpectation => {
                let h = fd_hessian(model, theta0, &obs, &steps)?;
                -h
            }
            FisherMethod::ScoreCovariance => {
                let s = fd_score(model, theta0, &obs, &steps)?;
                &s * s.transpose()
            }
        };
        mean += &term;
        mean_sq += term.component_mul(&term);
    }
    mean /= draws as f64;
    mean_sq /= draws as f64;
    let mut se = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let var = (mean_sq[(i, j)] - mean[(i, j)] * mean[(i, j)]).max(0.0);
            se[(i, j)] = (var / draws as f64).sqrt();
        }
    }

    // Symmetrize before inverting.
    let info = (&mean + mean.transpose()) * 0.5;
    let eig = info.clone().symmetric_eigen();
    let max_l = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min_l = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if min_l <= 0.0 {
        return Err(Error::numerical(format!(
            "estimated information is not positive definite (min eigenvalue {min_l:.3e})"
        )));
    }
    let condition_number = max_l / min_l;
    if condition_number > MAX_CONDITION {
        return Err(Error::numerical(format!(
            "estimated information is near-singular: condition number {condition_number:.3e}"
        )));
    }
    let inverse = info
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("failed to invert estimated information"))?;
    Ok(FisherEstimate { information: info, inverse, standard_error: se, draws, condition_number })
}

fn obs_ln_density(model: &ModelSpec, theta: &[f64], obs: &Observation) -> Result<f64> {
    model.observation_log_density(theta, obs)
}

fn fd_score(
    model: &ModelSpec,
    theta0: &[f64],
    obs: &Observation,
    steps: &[f64],
) -> Result<DVector<f64>> {
    let d = theta0.len();
    let mut g = DVector::zeros(d);
    let mut t = theta0.to_vec();
    for j in 0..d {
        let h = steps[j];
        t[j] = theta0[j] + h;
        let fp = obs_ln_density(model, &t, obs)?;
        t[j] = theta0[j] - h;
        let fm = obs_ln_density(model, &t, obs)?;
        t[j] = theta0[j];
        g[j] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

fn fd_hessian(
    model: &ModelSpec,
    theta0: &[f64],
    obs: &Observation,
    steps: &[f64],
) -> Result<DMatrix<f64>> {
    let d = theta0.len();
    let f0 = obs_ln_density(model, theta0, obs)?;
    let mut h = DMatrix::zeros(d, d);
    let mut t = theta0.to_vec();
    for i in 0..d {
        let hi = steps[i];
        t[i] = theta0[i] + hi;
        let fp = obs_ln_density(model, &t, obs)?;
        t[i] = theta0[i] - hi;
        let fm = obs_ln_density(model, &t, obs)?;
        t[i] = theta0[i];
        h[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in (i + 1)..d {
            let hj = steps[j];
            let mut eval = |si: f64, sj: f64| -> Result<f64> {
                t[i] = theta0[i] + si * hi;
                t[j] = theta0[j] + sj * hj;
                let v = obs_ln_density(model, &t, obs);
                t[i] = theta0[i];
                t[j] = theta0[j];
                v
            };
            let v = (eval(1.0, 1.0)? - eval(1.0, -1.0)? - eval(-1.0, 1.0)? + eval(-1.0, -1.0)?)
                / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}
