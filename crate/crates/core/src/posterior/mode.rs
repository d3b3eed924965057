//! Posterior-mode finding: damped Newton iteration with a step-halving line
//! search and a curvature check at the solution, plus the one-step Newton
//! approximation that maps the mode under one prior copula to the mode under
//! another.

use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::marginal::MarginalPrior;
use nalgebra::{DMatrix, DVector};

/// A twice-differentiable objective (a log-posterior) to maximize.
pub trait Objective {
    fn value(&self, theta: &DVector<f64>) -> f64;
    fn gradient(&self, theta: &DVector<f64>) -> Result<DVector<f64>>;
    fn hessian(&self, theta: &DVector<f64>) -> Result<DMatrix<f64>>;
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { gradient_tolerance: 1e-10, max_iterations: 200 }
    }
}

/// A located mode.
#[derive(Clone, Debug)]
pub struct Mode {
    pub location: DVector<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Modes under two priors with their distances to a reference parameter.
#[derive(Clone, Debug)]
pub struct ModePair {
    pub first: DVector<f64>,
    pub second: DVector<f64>,
    pub dist_first: f64,
    pub dist_second: f64,
}

impl ModePair {
    pub fn new(first: DVector<f64>, second: DVector<f64>, reference: &DVector<f64>) -> Self {
        let dist_first = (&first - reference).norm();
        let dist_second = (&second - reference).norm();
        ModePair { first, second, dist_first, dist_second }
    }
}

/// Maximize `objective` by damped Newton: full Newton steps, halved while the
/// objective does not improve; requires a negative-definite Hessian at the
/// stationary point.
pub fn posterior_mode(
    objective: &impl Objective,
    start: &DVector<f64>,
    options: NewtonOptions,
) -> Result<Mode> {
    let mut theta = start.clone();
    let mut value = objective.value(&theta);
    if !value.is_finite() {
        return Err(Error::domain("mode search started outside the support"));
    }
    for iter in 0..options.max_iterations {
        let grad = objective.gradient(&theta)?;
        let gnorm = grad.norm();
        if gnorm < options.gradient_tolerance {
            let hess = objective.hessian(&theta)?;
            let eig = hess.symmetric_eigenvalues();
            if eig.iter().any(|&l| l >= 0.0) {
                return Err(Error::numerical(format!(
                    "stationary point at iteration {iter} is not a maximum (eigenvalues {eig})"
                )));
            }
            return Ok(Mode { location: theta, gradient_norm: gnorm, iterations: iter });
        }
        let hess = objective.hessian(&theta)?;
        // Newton direction; fall back to steepest ascent when the solve
        // fails or points downhill.
        let mut dir = match hess.clone().lu().solve(&(-&grad)) {
            Some(d) => d,
            None => grad.clone() / gnorm,
        };
        if dir.dot(&grad) <= 0.0 {
            dir = grad.clone() / gnorm;
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = &theta + &dir * step;
            let cand_value = objective.value(&candidate);
            if cand_value.is_finite() && cand_value > value {
                theta = candidate;
                value = cand_value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No ascent along the Newton direction; accept convergence only
            // if the gradient is already tiny relative to the curvature.
            let scale = hess.norm().max(1.0);
            if gnorm < options.gradient_tolerance * scale.max(1e6) {
                let eig = hess.symmetric_eigenvalues();
                if eig.iter().all(|&l| l < 0.0) {
                    return Ok(Mode { location: theta, gradient_norm: gnorm, iterations: iter });
                }
            }
            return Err(Error::numerical(format!(
                "line search stalled at iteration {iter} with gradient norm {gnorm:.3e}"
            )));
        }
    }
    Err(Error::numerical(format!(
        "mode search did not converge in {} iterations",
        options.max_iterations
    )))
}

/// One-step Newton approximation of the mode under a second prior copula:
/// starting from the mode under copula `c1`, take a single Newton step of the
/// second log-posterior, whose gradient differs only by the copula terms.
/// The u-gradient is mapped to theta-space by the marginal densities.
pub fn one_step_newton_mode(
    mode_under_first: &DVector<f64>,
    observed_info: &DMatrix<f64>,
    c1: &CopulaSpec,
    c2: &CopulaSpec,
    marginals: &[MarginalPrior],
) -> Result<DVector<f64>> {
    let d = mode_under_first.len();
    if marginals.len() != d || c1.dim() != d || c2.dim() != d {
        return Err(Error::argument("dimension mismatch in one-step Newton inputs"));
    }
    let mut u = Vec::with_capacity(d);
    let mut pdf = Vec::with_capacity(d);
    for (m, &x) in marginals.iter().zip(mode_under_first.iter()) {
        if !m.in_support(x) {
            return Err(Error::domain("mode lies outside a marginal support"));
        }
        u.push(m.cdf(x).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0));
        pdf.push(m.pdf(x));
    }
    let g1 = c1.log_density_grad(&u)?;
    let g2 = c2.log_density_grad(&u)?;
    // Gradient of log c1 - log c2 in theta-space.
    let diff = DVector::from_iterator(d, (0..d).map(|j| pdf[j] * (g1[j] - g2[j])));
    let correction = observed_info
        .clone()
        .lu()
        .solve(&diff)
        .ok_or_else(|| Error::numerical("observed information is singular"))?;
    Ok(mode_under_first - correction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dataset, ModelSpec};
    use crate::posterior::PosteriorDensity;
    use crate::prior::CopulaPrior;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Quadratic {
        center: DVector<f64>,
    }

    impl Objective for Quadratic {
        fn value(&self, theta: &DVector<f64>) -> f64 {
            -(theta - &self.center).norm_squared()
        }
        fn gradient(&self, theta: &DVector<f64>) -> crate::Result<DVector<f64>> {
            Ok(-2.0 * (theta - &self.center))
        }
        fn hessian(&self, theta: &DVector<f64>) -> crate::Result<DMatrix<f64>> {
            Ok(-2.0 * DMatrix::identity(theta.len(), theta.len()))
        }
    }

    fn regression_prior(copula: CopulaSpec) -> CopulaPrior {
        CopulaPrior::new(
            vec![
                MarginalPrior::normal(0.0, 1.0).unwrap(),
                MarginalPrior::normal(0.0, 1.0).unwrap(),
            ],
            copula,
        )
        .unwrap()
    }

    #[test]
    fn quadratic_mode_found_in_one_step() {
        let obj = Quadratic { center: DVector::from_vec(vec![1.5, -2.0]) };
        let mode = posterior_mode(&obj, &DVector::zeros(2), NewtonOptions::default()).unwrap();
        assert!((mode.location - DVector::from_vec(vec![1.5, -2.0])).norm() < 1e-12);
        assert!(mode.iterations <= 2);
    }

    #[test]
    fn ridge_mode_matches_closed_form() {
        let model = ModelSpec::LinRegKnownVar { noise_variance: 5.0, covariates: 2 };
        let prior = regression_prior(CopulaSpec::independence(2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let data = model.generate_data(&[1.0, -0.5], 80, &mut rng).unwrap();
        let post = PosteriorDensity::new(&model, &prior, &data);
        let mode = posterior_mode(&post, &DVector::zeros(2), NewtonOptions::default()).unwrap();
        if let Dataset::RegressionSummary { xtx, xty, .. } = &data {
            let expected = (DMatrix::identity(2, 2) + xtx / 5.0)
                .try_inverse()
                .unwrap()
                * (xty / 5.0);
            assert!(
                (&mode.location - &expected).norm() < 1e-9,
                "mode {} vs ridge {}",
                mode.location,
                expected
            );
        } else {
            unreachable!();
        }
        // Centered data pin the mode at the origin.
        let centered = Dataset::RegressionSummary {
            n: 40,
            xtx: DMatrix::identity(2, 2) * 40.0,
            xty: DVector::zeros(2),
            yty: 1.0,
        };
        let post = PosteriorDensity::new(&model, &prior, &centered);
        let mode = posterior_mode(&post, &DVector::from_vec(vec![0.4, -0.7]), NewtonOptions::default())
            .unwrap();
        assert!(mode.location.norm() < 1e-12);
    }

    #[test]
    fn mode_invariant_to_start_point() {
        let model = ModelSpec::LinRegKnownVar { noise_variance: 5.0, covariates: 2 };
        let prior = regression_prior(CopulaSpec::student_t_bivariate(0.0, 4.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let data = model.generate_data(&[0.3, 0.9], 30, &mut rng).unwrap();
        let post = PosteriorDensity::new(&model, &prior, &data);
        let mle_start = model.mle(&data).unwrap().unwrap();
        let a = posterior_mode(&post, &mle_start, NewtonOptions::default()).unwrap();
        let b = posterior_mode(&post, &DVector::zeros(2), NewtonOptions::default()).unwrap();
        assert!((a.location - b.location).norm() < 1e-8);
    }

    #[test]
    fn t_copula_mode_matches_grid_refinement_oracle() {
        let model = ModelSpec::LinRegKnownVar { noise_variance: 5.0, covariates: 2 };
        let prior = regression_prior(CopulaSpec::student_t_bivariate(0.0, 4.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let data = model.generate_data(&[0.0, 0.0], 10_000, &mut rng).unwrap();
        let post = PosteriorDensity::new(&model, &prior, &data);
        let start = model.mle(&data).unwrap().unwrap();
        let mode = posterior_mode(&post, &start, NewtonOptions::default()).unwrap();
        // Shrinking-box grid search oracle.
        let mut center = start.clone();
        let mut half = 0.2;
        for _ in 0..12 {
            let mut best = f64::NEG_INFINITY;
            let mut best_point = center.clone();
            let steps = 8;
            for i in 0..=steps {
                for j in 0..=steps {
                    let cand = DVector::from_vec(vec![
                        center[0] - half + 2.0 * half * i as f64 / steps as f64,
                        center[1] - half + 2.0 * half * j as f64 / steps as f64,
                    ]);
                    let v = post.value(&cand);
                    if v > best {
                        best = v;
                        best_point = cand;
                    }
                }
            }
            center = best_point;
            half *= 0.3;
        }
        assert!(
            (&mode.location - &center).norm() < 1e-6,
            "newton {} vs grid {}",
            mode.location,
            center
        );
    }

    #[test]
    fn identical_copulas_leave_mode_unchanged() {
        let c = CopulaSpec::student_t_bivariate(0.0, 4.0).unwrap();
        let marginals =
            vec![MarginalPrior::normal(0.0, 1.0).unwrap(), MarginalPrior::normal(0.0, 1.0).unwrap()];
        let mode1 = DVector::from_vec(vec![0.3, -0.4]);
        let info = DMatrix::identity(2, 2) * 50.0;
        let mode2 = one_step_newton_mode(&mode1, &info, &c, &c, &marginals).unwrap();
        assert!((mode2 - mode1).norm() < 1e-14);
    }

    #[test]
    fn one_step_newton_tracks_exact_second_mode() {
        let model = ModelSpec::LinRegKnownVar { noise_variance: 5.0, covariates: 2 };
        let independence = CopulaSpec::independence(2).unwrap();
        let t_copula = CopulaSpec::student_t_bivariate(0.0, 4.0).unwrap();
        let prior1 = regression_prior(independence.clone());
        let prior2 = regression_prior(t_copula.clone());
        let marginals = prior1.marginals().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut rel_errors = Vec::new();
        for n in [100u64, 1_000, 10_000] {
            let mut errs = Vec::new();
            for _ in 0..20 {
                let data = model.generate_data(&[0.2, 0.2], n, &mut rng).unwrap();
                let p1 = PosteriorDensity::new(&model, &prior1, &data);
                let p2 = PosteriorDensity::new(&model, &prior2, &data);
                let m1 = posterior_mode(&p1, &DVector::zeros(2), NewtonOptions::default()).unwrap();
                let m2 = posterior_mode(&p2, &m1.location, NewtonOptions::default()).unwrap();
                let info = -Objective::hessian(&p1, &m1.location).unwrap();
                let approx =
                    one_step_newton_mode(&m1.location, &info, &independence, &t_copula, &marginals)
                        .unwrap();
                let denom = (&m2.location - &m1.location).norm();
                if denom > 0.0 {
                    errs.push((&approx - &m2.location).norm() / denom);
                }
            }
            errs.sort_by(f64::total_cmp);
            rel_errors.push(errs[errs.len() / 2]);
        }
        // Relative error below 10% at n = 10^4 and decreasing in n.
        assert!(rel_errors[2] < 0.10, "median relative errors {rel_errors:?}");
        assert!(
            rel_errors[0] > rel_errors[1] && rel_errors[1] > rel_errors[2],
            "median relative errors not decreasing: {rel_errors:?}"
        );
    }

    #[test]
    fn saddle_start_is_rejected_not_misreported() {
        // Maximizing a saddle objective must not return a "mode".
        struct Saddle;
        impl Objective for Saddle {
            fn value(&self, t: &DVector<f64>) -> f64 {
                t[0] * t[0] - t[1] * t[1]
            }
            fn gradient(&self, t: &DVector<f64>) -> crate::Result<DVector<f64>> {
                Ok(DVector::from_vec(vec![2.0 * t[0], -2.0 * t[1]]))
            }
            fn hessian(&self, _t: &DVector<f64>) -> crate::Result<DMatrix<f64>> {
                Ok(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, -2.0]))
            }
        }
        let res = posterior_mode(&Saddle, &DVector::from_vec(vec![0.0, 0.0]), NewtonOptions::default());
        assert!(res.is_err());
    }
}
