//! Statistical models: likelihoods over sufficient statistics, per-observation
//! log-densities, and seeded data generation.
//!
//! Supported kinds: the conditional reparameterization of the multinomial
//! model, the normal model in (mean, variance), the gamma model in
//! (shape, rate), linear regression with known noise variance, and the
//! exponential-pair model whose likelihood carries a copula density factor.

use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::prior::CopulaPrior;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use statrs::function::gamma::{digamma, ln_gamma};

/// Model kinds with their fixed (non-inferred) quantities.
#[derive(Clone, Debug)]
pub enum ModelSpec {
    /// Multinomial with `categories` cells, parameterized by the conditional
    /// probabilities `Z_1..Z_{w-1}` on `(0,1)^{w-1}`.
    MultinomialConditional { categories: usize },
    /// Normal with unknown mean and variance, `theta = (mu, sigma^2)`.
    NormalMeanVar,
    /// Gamma with unknown shape and rate, `theta = (alpha, beta)`.
    GammaShapeRate,
    /// Linear regression through the origin with known noise variance and
    /// standard-normal covariates, `theta = (beta_1..beta_k)`.
    LinRegKnownVar { noise_variance: f64, covariates: usize },
    /// Paired exponentials joined by a fixed copula, `theta = (lambda, kappa)`.
    ExpPairCopula { copula: CopulaSpec },
}

/// Kind-matched data payloads, reduced to sufficient statistics where the
/// likelihood factors through them.
#[derive(Clone, Debug)]
pub enum Dataset {
    MultinomialCounts { counts: Vec<u64> },
    NormalSummary { n: u64, sum: f64, sum_sq: f64 },
    GammaSummary { n: u64, sum: f64, sum_log: f64 },
    RegressionSummary { n: u64, xtx: DMatrix<f64>, xty: DVector<f64>, yty: f64 },
    /// Raw pairs; the copula factor does not reduce.
    ExpPairs { pairs: Vec<(f64, f64)> },
}

impl Dataset {
    pub fn sample_size(&self) -> u64 {
        match self {
            Dataset::MultinomialCounts { counts } => counts.iter().sum(),
            Dataset::NormalSummary { n, .. } => *n,
            Dataset::GammaSummary { n, .. } => *n,
            Dataset::RegressionSummary { n, .. } => *n,
            Dataset::ExpPairs { pairs } => pairs.len() as u64,
        }
    }
}

/// A single observation, used by the numeric Fisher oracle.
#[derive(Clone, Debug)]
pub enum Observation {
    Category(usize),
    Scalar(f64),
    Regression { x: DVector<f64>, y: f64 },
    Pair(f64, f64),
}

/// Conditional probabilities from cell probabilities:
/// `Z_v = p_v / (1 - sum_{t<v} p_t)`.
pub fn z_from_p(p: &[f64]) -> Result<Vec<f64>> {
    let w = p.len();
    if w < 2 {
        return Err(Error::argument("need at least two cell probabilities"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("cell probabilities sum to {total}, not 1")));
    }
    if p.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::domain("cell probabilities must lie strictly inside (0,1)"));
    }
    let mut z = Vec::with_capacity(w - 1);
    let mut remaining = 1.0;
    for &pv in &p[..w - 1] {
        z.push(pv / remaining);
        remaining -= pv;
    }
    Ok(z)
}

/// Cell probabilities from conditional probabilities:
/// `p_v = Z_v prod_{t<v} (1 - Z_t)`, with the final cell absorbing the rest.
pub fn p_from_z(z: &[f64]) -> Result<Vec<f64>> {
    if z.is_empty() {
        return Err(Error::argument("need at least one conditional probability"));
    }
    if z.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::domain("conditional probabilities must lie strictly inside (0,1)"));
    }
    let mut p = Vec::with_capacity(z.len() + 1);
    let mut remaining = 1.0;
    for &zv in z {
        p.push(zv * remaining);
        remaining *= 1.0 - zv;
    }
    p.push(remaining);
    Ok(p)
}

impl ModelSpec {
    /// Parameter dimension.
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::MultinomialConditional { categories } => categories - 1,
            ModelSpec::NormalMeanVar => 2,
            ModelSpec::GammaShapeRate => 2,
            ModelSpec::LinRegKnownVar { covariates, .. } => *covariates,
            ModelSpec::ExpPairCopula { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::MultinomialConditional { categories } if *categories < 2 => {
                Err(Error::parameter("multinomial needs at least 2 categories"))
            }
            ModelSpec::LinRegKnownVar { noise_variance, covariates } => {
                if !(*noise_variance > 0.0) {
                    Err(Error::parameter("noise variance must be positive"))
                } else if *covariates == 0 {
                    Err(Error::parameter("regression needs at least one covariate"))
                } else {
                    Ok(())
                }
            }
            ModelSpec::ExpPairCopula { copula } if copula.dim() != 2 => {
                Err(Error::parameter("exponential-pair copula must be bivariate"))
            }
            _ => Ok(()),
        }
    }

    /// Whether `theta` lies strictly inside the parameter space.
    pub fn contains_interior(&self, theta: &[f64]) -> bool {
        if theta.len() != self.dim() {
            return false;
        }
        match self {
            ModelSpec::MultinomialConditional { .. } => {
                theta.iter().all(|&z| z > 0.0 && z < 1.0)
            }
            ModelSpec::NormalMeanVar => theta[0].is_finite() && theta[1] > 0.0,
            ModelSpec::GammaShapeRate => theta[0] > 0.0 && theta[1] > 0.0,
            ModelSpec::LinRegKnownVar { .. } => theta.iter().all(|v| v.is_finite()),
            ModelSpec::ExpPairCopula { .. } => theta[0] > 0.0 && theta[1] > 0.0,
        }
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        let ok = matches!(
            (self, data),
            (ModelSpec::MultinomialConditional { .. }, Dataset::MultinomialCounts { .. })
                | (ModelSpec::NormalMeanVar, Dataset::NormalSummary { .. })
                | (ModelSpec::GammaShapeRate, Dataset::GammaSummary { .. })
                | (ModelSpec::LinRegKnownVar { .. }, Dataset::RegressionSummary { .. })
                | (ModelSpec::ExpPairCopula { .. }, Dataset::ExpPairs { .. })
        );
        if !ok {
            return Err(Error::argument("dataset kind does not match the model"));
        }
        Ok(())
    }

    /// Log-likelihood up to additive constants in the data; negative infinity
    /// on the boundary of the parameter space.
    pub fn log_likelihood(&self, theta: &[f64], data: &Dataset) -> Result<f64> {
        self.check_data(data)?;
        if theta.len() != self.dim() {
            return Err(Error::argument("parameter dimension mismatch"));
        }
        if !self.contains_interior(theta) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(match (self, data) {
            (ModelSpec::MultinomialConditional { categories }, Dataset::MultinomialCounts { counts }) => {
                let w = *categories;
                if counts.len() != w {
                    return Err(Error::argument(format!(
                        "expected {w} counts, got {}",
                        counts.len()
                    )));
                }
                let mut above: u64 = counts.iter().sum();
                let mut total = 0.0;
                for v in 0..(w - 1) {
                    above -= counts[v];
                    total += counts[v] as f64 * theta[v].ln()
                        + above as f64 * (1.0 - theta[v]).ln();
                }
                total
            }
            (ModelSpec::NormalMeanVar, Dataset::NormalSummary { n, sum, sum_sq }) => {
                let (mu, var) = (theta[0], theta[1]);
                let nf = *n as f64;
                let quad = sum_sq - 2.0 * mu * sum + nf * mu * mu;
                -0.5 * nf * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * quad / var
            }
            (ModelSpec::GammaShapeRate, Dataset::GammaSummary { n, sum, sum_log }) => {
                let (a, b) = (theta[0], theta[1]);
                let nf = *n as f64;
                nf * (a * b.ln() - ln_gamma(a)) + (a - 1.0) * sum_log - b * sum
            }
            (
                ModelSpec::LinRegKnownVar { noise_variance, .. },
                Dataset::RegressionSummary { n, xtx, xty, yty },
            ) => {
                let beta = DVector::from_column_slice(theta);
                let quad = yty - 2.0 * beta.dot(xty) + beta.dot(&(xtx * &beta));
                let nf = *n as f64;
                -0.5 * nf * (2.0 * std::f64::consts::PI * noise_variance).ln()
                    - 0.5 * quad / noise_variance
            }
            (ModelSpec::ExpPairCopula { copula }, Dataset::ExpPairs { pairs }) => {
                let (lambda, kappa) = (theta[0], theta[1]);
                let mut total = 0.0;
                for &(y, ystar) in pairs {
                    let u = [exp_cdf(lambda, y), exp_cdf(kappa, ystar)];
                    total += lambda.ln() - lambda * y + kappa.ln() - kappa * ystar
                        + copula.log_density(&u)?;
                }
                total
            }
            _ => unreachable!("check_data verified the pairing"),
        })
    }

    /// Gradient of the log-likelihood with respect to `theta`.
    pub fn log_likelihood_grad(&self, theta: &[f64], data: &Dataset) -> Result<DVector<f64>> {
        self.check_data(data)?;
        if !self.contains_interior(theta) {
            return Err(Error::domain("gradient requested outside the parameter interior"));
        }
        Ok(match (self, data) {
            (ModelSpec::MultinomialConditional { categories }, Dataset::MultinomialCounts { counts }) => {
                let w = *categories;
                let mut above: u64 = counts.iter().sum();
                let mut g = DVector::zeros(w - 1);
                for v in 0..(w - 1) {
                    above -= counts[v];
                    g[v] = counts[v] as f64 / theta[v] - above as f64 / (1.0 - theta[v]);
                }
                g
            }
            (ModelSpec::NormalMeanVar, Dataset::NormalSummary { n, sum, sum_sq }) => {
                let (mu, var) = (theta[0], theta[1]);
                let nf = *n as f64;
                let quad = sum_sq - 2.0 * mu * sum + nf * mu * mu;
                DVector::from_vec(vec![
                    (sum - nf * mu) / var,
                    -0.5 * nf / var + 0.5 * quad / (var * var),
                ])
            }
            (ModelSpec::GammaShapeRate, Dataset::GammaSummary { n, sum, sum_log }) => {
                let (a, b) = (theta[0], theta[1]);
                let nf = *n as f64;
                DVector::from_vec(vec![
                    nf * (b.ln() - digamma(a)) + sum_log,
                    nf * a / b - sum,
                ])
            }
            (
                ModelSpec::LinRegKnownVar { noise_variance, .. },
                Dataset::RegressionSummary { xtx, xty, .. },
            ) => {
                let beta = DVector::from_column_slice(theta);
                (xty - xtx * &beta) / *noise_variance
            }
            (ModelSpec::ExpPairCopula { copula }, Dataset::ExpPairs { pairs }) => {
                let (lambda, kappa) = (theta[0], theta[1]);
                let mut g = DVector::zeros(2);
                for &(y, ystar) in pairs {
                    let u = [exp_cdf(lambda, y), exp_cdf(kappa, ystar)];
                    let cg = copula.log_density_grad(&u)?;
                    // du/dlambda = y e^{-lambda y}.
                    g[0] += 1.0 / lambda - y + cg[0] * y * (-lambda * y).exp();
                    g[1] += 1.0 / kappa - ystar + cg[1] * ystar * (-kappa * ystar).exp();
                }
                g
            }
            _ => unreachable!(),
        })
    }

    /// Hessian of the log-likelihood with respect to `theta`.
    pub fn log_likelihood_hessian(&self, theta: &[f64], data: &Dataset) -> Result<DMatrix<f64>> {
        self.check_data(data)?;
        if !self.contains_interior(theta) {
            return Err(Error::domain("hessian requested outside the parameter interior"));
        }
        Ok(match (self, data) {
            (ModelSpec::MultinomialConditional { categories }, Dataset::MultinomialCounts { counts }) => {
                let w = *categories;
                let mut above: u64 = counts.iter().sum();
                let mut h = DMatrix::zeros(w - 1, w - 1);
                for v in 0..(w - 1) {
                    above -= counts[v];
                    let om = 1.0 - theta[v];
                    h[(v, v)] = -(counts[v] as f64) / (theta[v] * theta[v])
                        - above as f64 / (om * om);
                }
                h
            }
            (ModelSpec::NormalMeanVar, Dataset::NormalSummary { n, sum, sum_sq }) => {
                let (mu, var) = (theta[0], theta[1]);
                let nf = *n as f64;
                let quad = sum_sq - 2.0 * mu * sum + nf * mu * mu;
                let mut h = DMatrix::zeros(2, 2);
                h[(0, 0)] = -nf / var;
                h[(0, 1)] = -(sum - nf * mu) / (var * var);
                h[(1, 0)] = h[(0, 1)];
                h[(1, 1)] = 0.5 * nf / (var * var) - quad / (var * var * var);
                h
            }
            (ModelSpec::GammaShapeRate, Dataset::GammaSummary { n, .. }) => {
                let (a, b) = (theta[0], theta[1]);
                let nf = *n as f64;
                let mut h = DMatrix::zeros(2, 2);
                h[(0, 0)] = -nf * crate::special::trigamma(a);
                h[(0, 1)] = nf / b;
                h[(1, 0)] = h[(0, 1)];
                h[(1, 1)] = -nf * a / (b * b);
                h
            }
            (ModelSpec::LinRegKnownVar { noise_variance, .. }, Dataset::RegressionSummary { xtx, .. }) => {
                -xtx / *noise_variance
            }
            (ModelSpec::ExpPairCopula { copula }, Dataset::ExpPairs { pairs }) => {
                let (lambda, kappa) = (theta[0], theta[1]);
                let mut h = DMatrix::zeros(2, 2);
                for &(y, ystar) in pairs {
                    let u = [exp_cdf(lambda, y), exp_cdf(kappa, ystar)];
                    let cg = copula.log_density_grad(&u)?;
                    let ch = copula.log_density_hessian(&u)?;
                    let du1 = y * (-lambda * y).exp();
                    let du2 = ystar * (-kappa * ystar).exp();
                    let d2u1 = -y * y * (-lambda * y).exp();
                    let d2u2 = -ystar * ystar * (-kappa * ystar).exp();
                    h[(0, 0)] += -1.0 / (lambda * lambda) + ch[(0, 0)] * du1 * du1 + cg[0] * d2u1;
                    h[(1, 1)] += -1.0 / (kappa * kappa) + ch[(1, 1)] * du2 * du2 + cg[1] * d2u2;
                    let cross = ch[(0, 1)] * du1 * du2;
                    h[(0, 1)] += cross;
                    h[(1, 0)] += cross;
                }
                h
            }
            _ => unreachable!(),
        })
    }

    /// Closed-form MLE where available (multinomial conditional probabilities
    /// and the known-variance regression); used as a reference in tests and
    /// as an optimizer start.
    pub fn mle(&self, data: &Dataset) -> Result<Option<DVector<f64>>> {
        self.check_data(data)?;
        Ok(match (self, data) {
            (ModelSpec::MultinomialConditional { categories }, Dataset::MultinomialCounts { counts }) => {
                let w = *categories;
                let mut above: u64 = counts.iter().sum();
                let mut z = DVector::zeros(w - 1);
                for v in 0..(w - 1) {
                    let here = counts[v];
                    if above == 0 {
                        return Ok(None);
                    }
                    z[v] = here as f64 / above as f64;
                    above -= here;
                }
                if z.iter().any(|&v| v <= 0.0 || v >= 1.0) {
                    None
                } else {
                    Some(z)
                }
            }
            (ModelSpec::LinRegKnownVar { .. }, Dataset::RegressionSummary { xtx, xty, .. }) => {
                xtx.clone().lu().solve(xty)
            }
            _ => None,
        })
    }

    /// Generate a dataset of `n` i.i.d. observations from the model at
    /// `theta0`, reduced to sufficient statistics where applicable.
    pub fn generate_data<R: Rng + ?Sized>(
        &self,
        theta0: &[f64],
        n: u64,
        rng: &mut R,
    ) -> Result<Dataset> {
        if !self.contains_interior(theta0) {
            return Err(Error::domain(format!(
                "data generation requires an interior parameter, got {theta0:?}"
            )));
        }
        if n == 0 {
            return Err(Error::argument("sample size must be at least 1"));
        }
        Ok(match self {
            ModelSpec::MultinomialConditional { categories } => {
                // Chained binomials over the conditional probabilities.
                let w = *categories;
                let mut counts = vec![0u64; w];
                let mut remaining = n;
                for v in 0..(w - 1) {
                    if remaining == 0 {
                        break;
                    }
                    let draw = Binomial::new(remaining, theta0[v])
                        .map_err(|e| Error::parameter(e.to_string()))?
                        .sample(rng);
                    counts[v] = draw;
                    remaining -= draw;
                }
                counts[w - 1] = remaining;
                Dataset::MultinomialCounts { counts }
            }
            ModelSpec::NormalMeanVar => {
                let (mu, sd) = (theta0[0], theta0[1].sqrt());
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                for _ in 0..n {
                    let z: f64 = StandardNormal.sample(rng);
                    let y = mu + sd * z;
                    sum += y;
                    sum_sq += y * y;
                }
                Dataset::NormalSummary { n, sum, sum_sq }
            }
            ModelSpec::GammaShapeRate => {
                let dist = rand_distr::Gamma::new(theta0[0], 1.0 / theta0[1])
                    .map_err(|e| Error::parameter(e.to_string()))?;
                let mut sum = 0.0;
                let mut sum_log = 0.0;
                for _ in 0..n {
                    let y = dist.sample(rng);
                    sum += y;
                    sum_log += y.ln();
                }
                Dataset::GammaSummary { n, sum, sum_log }
            }
            ModelSpec::LinRegKnownVar { noise_variance, covariates } => {
                let k = *covariates;
                let sd = noise_variance.sqrt();
                let mut xtx = DMatrix::zeros(k, k);
                let mut xty = DVector::zeros(k);
                let mut yty = 0.0;
                let mut x: DVector<f64> = DVector::zeros(k);
                for _ in 0..n {
                    for j in 0..k {
                        x[j] = StandardNormal.sample(rng);
                    }
                    let eps: f64 = StandardNormal.sample(rng);
                    let y = x.iter().zip(theta0).map(|(xj, bj)| xj * bj).sum::<f64>() + sd * eps;
                    for a in 0..k {
                        for b in 0..k {
                            xtx[(a, b)] += x[a] * x[b];
                        }
                        xty[a] += x[a] * y;
                    }
                    yty += y * y;
                }
                Dataset::RegressionSummary { n, xtx, xty, yty }
            }
            ModelSpec::ExpPairCopula { copula } => {
                let (lambda, kappa) = (theta0[0], theta0[1]);
                let u = copula.sample(n as usize, rng)?;
                let pairs = (0..n as usize)
                    .map(|i| {
                        (
                            -(-u[(i, 0)]).ln_1p() / lambda,
                            -(-u[(i, 1)]).ln_1p() / kappa,
                        )
                    })
                    .collect();
                Dataset::ExpPairs { pairs }
            }
        })
    }

    /// Log-density of a single observation; the numeric Fisher oracle
    /// differentiates this in `theta`.
    pub fn observation_log_density(&self, theta: &[f64], obs: &Observation) -> Result<f64> {
        if !self.contains_interior(theta) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(match (self, obs) {
            (ModelSpec::MultinomialConditional { categories }, Observation::Category(v)) => {
                let w = *categories;
                if *v >= w {
                    return Err(Error::argument(format!("category {v} out of range")));
                }
                let mut total = 0.0;
                for t in 0..*v {
                    total += (1.0 - theta[t]).ln();
                }
                if *v < w - 1 {
                    total += theta[*v].ln();
                }
                total
            }
            (ModelSpec::NormalMeanVar, Observation::Scalar(y)) => {
                let (mu, var) = (theta[0], theta[1]);
                -0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * (y - mu) * (y - mu) / var
            }
            (ModelSpec::GammaShapeRate, Observation::Scalar(y)) => {
                let (a, b) = (theta[0], theta[1]);
                a * b.ln() - ln_gamma(a) + (a - 1.0) * y.ln() - b * y
            }
            (ModelSpec::LinRegKnownVar { noise_variance, .. }, Observation::Regression { x, y }) => {
                let mean: f64 = x.iter().zip(theta).map(|(xj, bj)| xj * bj).sum();
                let r = y - mean;
                -0.5 * (2.0 * std::f64::consts::PI * noise_variance).ln()
                    - 0.5 * r * r / noise_variance
            }
            (ModelSpec::ExpPairCopula { copula }, Observation::Pair(y, ystar)) => {
                let (lambda, kappa) = (theta[0], theta[1]);
                let u = [exp_cdf(lambda, *y), exp_cdf(kappa, *ystar)];
                lambda.ln() - lambda * y + kappa.ln() - kappa * ystar + copula.log_density(&u)?
            }
            _ => return Err(Error::argument("observation kind does not match the model")),
        })
    }

    /// Draw a single observation from the model at `theta0`.
    pub fn sample_observation<R: Rng + ?Sized>(
        &self,
        theta0: &[f64],
        rng: &mut R,
    ) -> Result<Observation> {
        if !self.contains_interior(theta0) {
            return Err(Error::domain("observation sampling requires an interior parameter"));
        }
        Ok(match self {
            ModelSpec::MultinomialConditional { categories } => {
                let w = *categories;
                let mut v = w - 1;
                for t in 0..(w - 1) {
                    if rng.random::<f64>() < theta0[t] {
                        v = t;
                        break;
                    }
                }
                Observation::Category(v)
            }
            ModelSpec::NormalMeanVar => {
                let z: f64 = StandardNormal.sample(rng);
                Observation::Scalar(theta0[0] + theta0[1].sqrt() * z)
            }
            ModelSpec::GammaShapeRate => {
                let dist = rand_distr::Gamma::new(theta0[0], 1.0 / theta0[1])
                    .map_err(|e| Error::parameter(e.to_string()))?;
                Observation::Scalar(dist.sample(rng))
            }
            ModelSpec::LinRegKnownVar { noise_variance, covariates } => {
                let mut x: DVector<f64> = DVector::zeros(*covariates);
                for j in 0..*covariates {
                    x[j] = StandardNormal.sample(rng);
                }
                let eps: f64 = StandardNormal.sample(rng);
                let y = x.iter().zip(theta0).map(|(xj, bj)| xj * bj).sum::<f64>()
                    + noise_variance.sqrt() * eps;
                Observation::Regression { x, y }
            }
            ModelSpec::ExpPairCopula { copula } => {
                let u = copula.sample(1, rng)?;
                Observation::Pair(
                    -(-u[(0, 0)]).ln_1p() / theta0[0],
                    -(-u[(0, 1)]).ln_1p() / theta0[1],
                )
            }
        })
    }
}

/// Draw `theta0` from a design prior and then a dataset from the model at
/// that parameter; returns both so coverage studies can score containment.
pub fn prior_predictive_generate<R: Rng + ?Sized>(
    model: &ModelSpec,
    design_prior: &CopulaPrior,
    n: u64,
    rng: &mut R,
) -> Result<(DVector<f64>, Dataset)> {
    if design_prior.dim() != model.dim() {
        return Err(Error::argument(format!(
            "design prior dimension {} does not match model dimension {}",
            design_prior.dim(),
            model.dim()
        )));
    }
    let draw = design_prior.sample(1, rng)?;
    let theta0: Vec<f64> = (0..model.dim()).map(|j| draw[(0, j)]).collect();
    let data = model.generate_data(&theta0, n, rng)?;
    Ok((DVector::from_vec(theta0), data))
}

fn exp_cdf(rate: f64, y: f64) -> f64 {
    // 1 - e^{-rate * y}, clamped inside (0,1) for the copula factor.
    (-(-rate * y).exp_m1()).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}
