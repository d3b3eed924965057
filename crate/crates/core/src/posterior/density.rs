//! The log-posterior assembled from a model, a dataset, and a copula prior,
//! with analytic gradient and Hessian via the chain rule through the marginal
//! CDF transforms.

use super::mode::Objective;
use crate::error::Result;
use crate::model::{Dataset, ModelSpec};
use crate::prior::CopulaPrior;
use nalgebra::{DMatrix, DVector};

/// Unnormalized log-posterior `log L(theta; y) + log p(theta)`.
pub struct PosteriorDensity<'a> {
    model: &'a ModelSpec,
    prior: &'a CopulaPrior,
    data: &'a Dataset,
}

impl<'a> PosteriorDensity<'a> {
    pub fn new(model: &'a ModelSpec, prior: &'a CopulaPrior, data: &'a Dataset) -> Self {
        PosteriorDensity { model, prior, data }
    }

    pub fn log_pdf(&self, theta: &[f64]) -> f64 {
        let prior = self.prior.log_pdf(theta);
        if prior == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        match self.model.log_likelihood(theta, self.data) {
            Ok(ll) => ll + prior,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    fn u_point(&self, theta: &[f64]) -> Vec<f64> {
        self.prior
            .marginals()
            .iter()
            .zip(theta)
            .map(|(m, &x)| m.cdf(x).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
            .collect()
    }
}

impl Objective for PosteriorDensity<'_> {
    fn value(&self, theta: &DVector<f64>) -> f64 {
        self.log_pdf(theta.as_slice())
    }

    fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        let t = theta.as_slice();
        let mut g = self.model.log_likelihood_grad(t, self.data)?;
        let u = self.u_point(t);
        let cg = self.prior.copula().log_density_grad(&u)?;
        for (j, m) in self.prior.marginals().iter().enumerate() {
            let pdf = m.pdf(t[j]);
            g[j] += m.ln_pdf_deriv(t[j]) + pdf * cg[j];
        }
        Ok(g)
    }

    fn hessian(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let t = theta.as_slice();
        let mut h = self.model.log_likelihood_hessian(t, self.data)?;
        let u = self.u_point(t);
        let cg = self.prior.copula().log_density_grad(&u)?;
        let ch = self.prior.copula().log_density_hessian(&u)?;
        let d = theta.len();
        let pdfs: Vec<f64> = self.prior.marginals().iter().zip(t).map(|(m, &x)| m.pdf(x)).collect();
        for i in 0..d {
            for j in 0..d {
                h[(i, j)] += pdfs[i] * pdfs[j] * ch[(i, j)];
            }
            let m = &self.prior.marginals()[i];
            // d/dtheta of ln f and of f * d(log c)/du.
            let dlnf = m.ln_pdf_deriv(t[i]);
            let d2lnf = second_ln_pdf_deriv(m, t[i]);
            h[(i, i)] += d2lnf + dlnf * pdfs[i] * cg[i];
        }
        Ok(h)
    }
}

fn second_ln_pdf_deriv(m: &crate::marginal::MarginalPrior, x: f64) -> f64 {
    use crate::marginal::MarginalPrior::*;
    match *m {
        Beta { alpha, beta } => {
            -(alpha - 1.0) / (x * x) - (beta - 1.0) / ((1.0 - x) * (1.0 - x))
        }
        Gamma { shape, .. } => -(shape - 1.0) / (x * x),
        Normal { variance, .. } => -1.0 / variance,
    }
}
