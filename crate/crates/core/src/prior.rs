//! The copula prior: a product of marginal densities times a copula density
//! evaluated at the marginal CDFs.

use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::marginal::MarginalPrior;
use nalgebra::DMatrix;
use rand::Rng;

/// Joint prior `p(theta) = prod_j f_j(theta_j) * c(F_1(theta_1), ..., F_d(theta_d))`.
#[derive(Clone, Debug)]
pub struct CopulaPrior {
    marginals: Vec<MarginalPrior>,
    copula: CopulaSpec,
}

impl CopulaPrior {
    pub fn new(marginals: Vec<MarginalPrior>, copula: CopulaSpec) -> Result<Self> {
        if marginals.len() != copula.dim() {
            return Err(Error::argument(format!(
                "{} marginals but copula dimension {}",
                marginals.len(),
                copula.dim()
            )));
        }
        for m in &marginals {
            m.validate()?;
        }
        Ok(CopulaPrior { marginals, copula })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[MarginalPrior] {
        &self.marginals
    }

    pub fn copula(&self) -> &CopulaSpec {
        &self.copula
    }

    /// `log p(theta)`; returns negative infinity outside the product support
    /// rather than an error.
    pub fn log_pdf(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.dim());
        let mut total = 0.0;
        let mut u = Vec::with_capacity(theta.len());
        for (m, &x) in self.marginals.iter().zip(theta) {
            if !m.in_support(x) {
                return f64::NEG_INFINITY;
            }
            total += m.ln_pdf(x);
            // Marginal CDF values can round onto the boundary in the extreme
            // tails; nudge inside since the copula density needs (0,1).
            u.push(m.cdf(x).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0));
        }
        match self.copula.log_density(&u) {
            Ok(c) => total + c,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Draw `n` joint samples (rows) by sampling the copula and applying the
    /// marginal quantile transforms componentwise.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DMatrix<f64>> {
        let mut pts = self.copula.sample(n, rng)?;
        for j in 0..self.dim() {
            for i in 0..n {
                pts[(i, j)] = self.marginals[j].quantile(pts[(i, j)])?;
            }
        }
        Ok(pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kendall::kendall_tau;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn multinomial_study_prior(rho: f64) -> CopulaPrior {
        CopulaPrior::new(
            vec![
                MarginalPrior::beta(20.0, 40.0).unwrap(),
                MarginalPrior::beta(30.0, 30.0).unwrap(),
            ],
            CopulaSpec::gaussian_bivariate(rho).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn independence_copula_factorizes() {
        let prior = CopulaPrior::new(
            vec![
                MarginalPrior::beta(2.0, 3.0).unwrap(),
                MarginalPrior::gamma(2.0, 1.0).unwrap(),
            ],
            CopulaSpec::independence(2).unwrap(),
        )
        .unwrap();
        for &(a, b) in &[(0.3, 0.5), (0.7, 2.0), (0.1, 4.0)] {
            let joint = prior.log_pdf(&[a, b]);
            let split = prior.marginals()[0].ln_pdf(a) + prior.marginals()[1].ln_pdf(b);
            assert!((joint - split).abs() < 1e-14, "joint {joint} split {split}");
        }
    }

    #[test]
    fn outside_support_is_minus_infinity_not_error() {
        let prior = multinomial_study_prior(-0.9);
        assert_eq!(prior.log_pdf(&[-0.2, 0.5]), f64::NEG_INFINITY);
        assert_eq!(prior.log_pdf(&[0.5, 1.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn beta_pair_sampling_reproduces_marginal_means_and_tau() {
        let prior = multinomial_study_prior(-0.9);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 10_000;
        let pts = prior.sample(n, &mut rng).unwrap();
        let m1 = pts.column(0).mean();
        let m2 = pts.column(1).mean();
        assert!((m1 - 1.0 / 3.0).abs() < 0.01, "mean of first marginal {m1}");
        assert!((m2 - 0.5).abs() < 0.01, "mean of second marginal {m2}");
        let xs: Vec<f64> = pts.column(0).iter().copied().collect();
        let ys: Vec<f64> = pts.column(1).iter().copied().collect();
        let tau = kendall_tau(&xs, &ys).unwrap();
        assert!((tau - (-0.713)).abs() < 0.02, "tau {tau}");
    }

    #[test]
    fn gamma_pair_sampling_reproduces_gaussian_score_correlation() {
        let prior = CopulaPrior::new(
            vec![
                MarginalPrior::gamma(1000.0, 5000.0).unwrap(),
                MarginalPrior::gamma(1000.0, 800.0).unwrap(),
            ],
            CopulaSpec::gaussian_bivariate(0.4).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10_000;
        let pts = prior.sample(n, &mut rng).unwrap();
        // Pearson correlation of the Gaussian scores recovers the copula
        // parameter.
        let mut z1 = Vec::with_capacity(n);
        let mut z2 = Vec::with_capacity(n);
        for i in 0..n {
            z1.push(crate::special::normal_quantile(prior.marginals()[0].cdf(pts[(i, 0)])).unwrap());
            z2.push(crate::special::normal_quantile(prior.marginals()[1].cdf(pts[(i, 1)])).unwrap());
        }
        let mean1: f64 = z1.iter().sum::<f64>() / n as f64;
        let mean2: f64 = z2.iter().sum::<f64>() / n as f64;
        let mut num = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for i in 0..n {
            let a = z1[i] - mean1;
            let b = z2[i] - mean2;
            num += a * b;
            d1 += a * a;
            d2 += b * b;
        }
        let rho = num / (d1 * d2).sqrt();
        assert!((rho - 0.4).abs() < 0.03, "score correlation {rho}");
    }

    #[test]
    fn sampled_marginals_pass_ks_against_specified_cdfs() {
        let priors = [
            multinomial_study_prior(-0.9),
            CopulaPrior::new(
                vec![
                    MarginalPrior::gamma(2.0, 1.5).unwrap(),
                    MarginalPrior::normal(1.0, 2.0).unwrap(),
                ],
                CopulaSpec::student_t_bivariate(0.3, 4.0).unwrap(),
            )
            .unwrap(),
        ];
        let n = 10_000usize;
        let crit = 1.628 / (n as f64).sqrt();
        for (k, prior) in priors.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
            let pts = prior.sample(n, &mut rng).unwrap();
            for j in 0..prior.dim() {
                let mut u: Vec<f64> =
                    (0..n).map(|i| prior.marginals()[j].cdf(pts[(i, j)])).collect();
                u.sort_by(f64::total_cmp);
                let d = u
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        ((i + 1) as f64 / n as f64 - x).abs().max((x - i as f64 / n as f64).abs())
                    })
                    .fold(0.0_f64, f64::max);
                assert!(d < crit, "prior {k} marginal {j}: KS {d}");
            }
        }
    }

    #[test]
    fn density_integrates_to_one_for_bounded_marginals() {
        let prior = multinomial_study_prior(-0.9);
        let g = 400usize;
        let mut total = 0.0;
        for i in 0..g {
            let x = (i as f64 + 0.5) / g as f64;
            for j in 0..g {
                let y = (j as f64 + 0.5) / g as f64;
                total += prior.log_pdf(&[x, y]).exp();
            }
        }
        total /= (g * g) as f64;
        assert!((total - 1.0).abs() < 1e-3, "integral {total}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let res = CopulaPrior::new(
            vec![MarginalPrior::beta(2.0, 2.0).unwrap()],
            CopulaSpec::independence(2).unwrap(),
        );
        assert!(res.is_err());
    }
}
