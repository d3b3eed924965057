//! Marginal prior distributions: beta, gamma (shape/rate), and normal.
//!
//! Each family exposes the density, log-density and its derivative, CDF,
//! quantile, and sampling. Quantiles are polished with Newton steps so that
//! `quantile(cdf(x))` round-trips to 1e-10.

use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_quantile};
use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Gamma};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

/// A univariate marginal prior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum MarginalPrior {
    Beta { alpha: f64, beta: f64 },
    Gamma { shape: f64, rate: f64 },
    Normal { mean: f64, variance: f64 },
}

impl MarginalPrior {
    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::parameter(format!("beta parameters must be positive, got ({alpha},{beta})")));
        }
        Ok(MarginalPrior::Beta { alpha, beta })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0) || !shape.is_finite() || !rate.is_finite() {
            return Err(Error::parameter(format!("gamma parameters must be positive, got ({shape},{rate})")));
        }
        Ok(MarginalPrior::Gamma { shape, rate })
    }

    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !mean.is_finite() || !variance.is_finite() {
            return Err(Error::parameter(format!("normal variance must be positive, got {variance}")));
        }
        Ok(MarginalPrior::Normal { mean, variance })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MarginalPrior::Beta { alpha, beta } => Self::beta(alpha, beta).map(|_| ()),
            MarginalPrior::Gamma { shape, rate } => Self::gamma(shape, rate).map(|_| ()),
            MarginalPrior::Normal { mean, variance } => Self::normal(mean, variance).map(|_| ()),
        }
    }

    /// Whether `x` lies strictly inside the support.
    pub fn in_support(&self, x: f64) -> bool {
        match self {
            MarginalPrior::Beta { .. } => x > 0.0 && x < 1.0,
            MarginalPrior::Gamma { .. } => x > 0.0,
            MarginalPrior::Normal { .. } => x.is_finite(),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            MarginalPrior::Beta { alpha, beta } => alpha / (alpha + beta),
            MarginalPrior::Gamma { shape, rate } => shape / rate,
            MarginalPrior::Normal { mean, .. } => mean,
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !self.in_support(x) {
            return f64::NEG_INFINITY;
        }
        match *self {
            MarginalPrior::Beta { alpha, beta } => {
                (alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln() - ln_beta(alpha, beta)
            }
            MarginalPrior::Gamma { shape, rate } => {
                shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
            }
            MarginalPrior::Normal { mean, variance } => {
                let z = x - mean;
                -0.5 * (2.0 * std::f64::consts::PI * variance).ln() - 0.5 * z * z / variance
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Derivative of `ln f` with respect to `x` (interior points).
    pub fn ln_pdf_deriv(&self, x: f64) -> f64 {
        match *self {
            MarginalPrior::Beta { alpha, beta } => (alpha - 1.0) / x - (beta - 1.0) / (1.0 - x),
            MarginalPrior::Gamma { shape, rate } => (shape - 1.0) / x - rate,
            MarginalPrior::Normal { mean, variance } => -(x - mean) / variance,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            MarginalPrior::Beta { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    statrs::function::beta::beta_reg(alpha, beta, x)
                }
            }
            MarginalPrior::Gamma { shape, rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    statrs::function::gamma::gamma_lr(shape, rate * x)
                }
            }
            MarginalPrior::Normal { mean, variance } => normal_cdf((x - mean) / variance.sqrt()),
        }
    }

    /// Quantile function; a library inverse polished by Newton steps against
    /// this module's CDF/PDF pair.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("probability {p} not in (0,1)")));
        }
        let mut x = match *self {
            MarginalPrior::Beta { alpha, beta } => Beta::new(alpha, beta)
                .map_err(|e| Error::parameter(e.to_string()))?
                .inverse_cdf(p),
            MarginalPrior::Gamma { shape, rate } => Gamma::new(shape, rate)
                .map_err(|e| Error::parameter(e.to_string()))?
                .inverse_cdf(p),
            MarginalPrior::Normal { mean, variance } => {
                return Ok(mean + variance.sqrt() * normal_quantile(p)?);
            }
        };
        for _ in 0..4 {
            if !self.in_support(x) {
                break;
            }
            let f = self.pdf(x);
            if f <= 0.0 || !f.is_finite() {
                break;
            }
            let step = (self.cdf(x) - p) / f;
            let next = x - step;
            if !self.in_support(next) {
                break;
            }
            x = next;
            if step.abs() <= 1e-14 * x.abs().max(1e-6) {
                break;
            }
        }
        Ok(x)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            MarginalPrior::Beta { alpha, beta } => {
                rand_distr::Beta::new(alpha, beta).expect("validated parameters").sample(rng)
            }
            MarginalPrior::Gamma { shape, rate } => rand_distr::Gamma::new(shape, 1.0 / rate)
                .expect("validated parameters")
                .sample(rng),
            MarginalPrior::Normal { mean, variance } => {
                let z: f64 = rand_distr::StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
        }
    }
}

impl std::fmt::Display for MarginalPrior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MarginalPrior::Beta { alpha, beta } => write!(f, "Beta({alpha}, {beta})"),
            MarginalPrior::Gamma { shape, rate } => write!(f, "Gamma({shape}, {rate})"),
            MarginalPrior::Normal { mean, variance } => write!(f, "Normal({mean}, {variance})"),
        }
    }
}
