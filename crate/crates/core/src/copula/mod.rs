//! Copula families as first-class objects: log-densities, their gradients and
//! Hessians in u-space, sampling, and rank-correlation conversions.
//!
//! Supported families: independence, Gaussian and Student-t (any dimension,
//! parameterized by a correlation matrix), and the bivariate Archimedean
//! Clayton, Gumbel, and Frank copulas. All supported copulas are absolutely
//! continuous with full support on the open unit cube.

mod archimedean;
mod stationary;

pub use stationary::{classify_stationary_points, StationaryClass, StationaryPoint, StationaryScan};

use crate::error::{Error, Result};
use crate::special::{
    normal_cdf, normal_pdf, normal_quantile, normal_quantile_coord, student_t_cdf,
    student_t_ln_pdf, student_t_quantile, student_t_quantile_coord, UnitCoord,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Copula family tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopulaFamily {
    Independence,
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
}

impl std::fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            CopulaFamily::Independence => "independence",
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::StudentT => "student-t",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Frank => "frank",
        };
        write!(f, "{name}")
    }
}

/// Shared data for the elliptical (Gaussian / Student-t) families.
#[derive(Clone, Debug)]
struct Elliptical {
    corr: DMatrix<f64>,
    chol: DMatrix<f64>,
    precision: DMatrix<f64>,
    ln_det: f64,
}

impl Elliptical {
    fn new(corr: DMatrix<f64>) -> Result<Self> {
        let d = corr.nrows();
        if d < 2 || corr.ncols() != d {
            return Err(Error::parameter(format!(
                "correlation matrix must be square with dim >= 2, got {}x{}",
                corr.nrows(),
                corr.ncols()
            )));
        }
        for i in 0..d {
            if (corr[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::parameter("correlation matrix must have unit diagonal"));
            }
            for j in 0..i {
                if (corr[(i, j)] - corr[(j, i)]).abs() > 1e-12 {
                    return Err(Error::parameter("correlation matrix must be symmetric"));
                }
            }
        }
        let chol = nalgebra::Cholesky::new(corr.clone())
            .ok_or_else(|| Error::parameter("correlation matrix is not positive definite"))?;
        let ln_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let precision = chol.inverse();
        Ok(Elliptical { corr, chol: chol.unpack(), precision, ln_det })
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Independence,
    Gaussian(Elliptical),
    StudentT {
        ell: Elliptical,
        dof: f64,
        /// Cached joint-over-marginals normalizing constant of the log-density.
        ln_norm: f64,
    },
    Clayton { phi: f64 },
    Gumbel { theta: f64 },
    Frank { theta: f64 },
}

/// A parameterized copula instance: immutable after construction and safe to
/// share across threads.
#[derive(Clone, Debug)]
pub struct CopulaSpec {
    dim: usize,
    kind: Kind,
}

impl CopulaSpec {
    pub fn independence(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::parameter("copula dimension must be at least 2"));
        }
        Ok(CopulaSpec { dim, kind: Kind::Independence })
    }

    pub fn gaussian(corr: DMatrix<f64>) -> Result<Self> {
        let ell = Elliptical::new(corr)?;
        Ok(CopulaSpec { dim: ell.corr.nrows(), kind: Kind::Gaussian(ell) })
    }

    pub fn gaussian_bivariate(rho: f64) -> Result<Self> {
        Self::gaussian(bivariate_corr(rho)?)
    }

    pub fn student_t(corr: DMatrix<f64>, dof: f64) -> Result<Self> {
        if !(dof > 0.0) || !dof.is_finite() {
            return Err(Error::parameter(format!("degrees of freedom must be positive, got {dof}")));
        }
        let ell = Elliptical::new(corr)?;
        let d = ell.corr.nrows() as f64;
        let ln_norm = ln_gamma((dof + d) / 2.0) + (d - 1.0) * ln_gamma(dof / 2.0)
            - d * ln_gamma((dof + 1.0) / 2.0);
        Ok(CopulaSpec { dim: ell.corr.nrows(), kind: Kind::StudentT { ell, dof, ln_norm } })
    }

    pub fn student_t_bivariate(rho: f64, dof: f64) -> Result<Self> {
        Self::student_t(bivariate_corr(rho)?, dof)
    }

    /// Bivariate Clayton copula; `phi = 0` degenerates to independence.
    pub fn clayton(phi: f64) -> Result<Self> {
        if !(phi >= 0.0) || !phi.is_finite() {
            return Err(Error::parameter(format!("clayton parameter must satisfy phi >= 0, got {phi}")));
        }
        Ok(CopulaSpec { dim: 2, kind: Kind::Clayton { phi } })
    }

    /// Bivariate Gumbel copula; `theta = 1` degenerates to independence.
    pub fn gumbel(theta: f64) -> Result<Self> {
        if !(theta >= 1.0) || !theta.is_finite() {
            return Err(Error::parameter(format!("gumbel parameter must satisfy theta >= 1, got {theta}")));
        }
        Ok(CopulaSpec { dim: 2, kind: Kind::Gumbel { theta } })
    }

    /// Bivariate Frank copula; `theta = 0` degenerates to independence.
    pub fn frank(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::parameter("frank parameter must be finite"));
        }
        Ok(CopulaSpec { dim: 2, kind: Kind::Frank { theta } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> CopulaFamily {
        match &self.kind {
            Kind::Independence => CopulaFamily::Independence,
            Kind::Gaussian(_) => CopulaFamily::Gaussian,
            Kind::StudentT { .. } => CopulaFamily::StudentT,
            Kind::Clayton { .. } => CopulaFamily::Clayton,
            Kind::Gumbel { .. } => CopulaFamily::Gumbel,
            Kind::Frank { .. } => CopulaFamily::Frank,
        }
    }

    /// Kendall's tau implied by the copula parameters. For elliptical families
    /// this requires dimension 2 (a single off-diagonal correlation).
    pub fn tau(&self) -> Result<f64> {
        match &self.kind {
            Kind::Independence => Ok(0.0),
            Kind::Gaussian(ell) | Kind::StudentT { ell, .. } => {
                if self.dim != 2 {
                    return Err(Error::Unsupported(
                        "scalar tau is only defined for bivariate elliptical copulas".into(),
                    ));
                }
                rho_to_tau(ell.corr[(0, 1)])
            }
            Kind::Clayton { phi } => archimedean_param_to_tau(CopulaFamily::Clayton, *phi),
            Kind::Gumbel { theta } => archimedean_param_to_tau(CopulaFamily::Gumbel, *theta),
            Kind::Frank { theta } => archimedean_param_to_tau(CopulaFamily::Frank, *theta),
        }
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::argument(format!(
                "point dimension {} does not match copula dimension {}",
                u.len(),
                self.dim
            )));
        }
        for &v in u {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(format!("coordinate {v} not strictly inside (0,1)")));
            }
        }
        Ok(())
    }

    /// Log-density `log c(u)` at an interior point.
    pub fn log_density(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        match &self.kind {
            Kind::Independence => Ok(0.0),
            Kind::Gaussian(ell) => {
                let mut z = DVector::zeros(self.dim);
                for (j, &uj) in u.iter().enumerate() {
                    z[j] = normal_quantile(uj)?;
                }
                Ok(gaussian_log_density(ell, &z))
            }
            Kind::StudentT { ell, dof, ln_norm } => {
                let mut x = DVector::zeros(self.dim);
                for (j, &uj) in u.iter().enumerate() {
                    x[j] = student_t_quantile(uj, *dof)?;
                }
                Ok(student_t_log_density(ell, *dof, *ln_norm, &x))
            }
            Kind::Clayton { phi } => Ok(archimedean::clayton_log_density(*phi, u[0], u[1])),
            Kind::Gumbel { theta } => Ok(archimedean::gumbel_log_density(*theta, u[0], u[1])),
            Kind::Frank { theta } => Ok(archimedean::frank_log_density(*theta, u[0], u[1])),
        }
    }

    /// Log-density at a tail-aware point; resolves coordinates specified via
    /// their upper-tail mass beyond `f64` resolution near 1.
    pub fn log_density_at(&self, coords: &[UnitCoord]) -> Result<f64> {
        if coords.len() != self.dim {
            return Err(Error::argument(format!(
                "point dimension {} does not match copula dimension {}",
                coords.len(),
                self.dim
            )));
        }
        match &self.kind {
            Kind::Gaussian(ell) => {
                let z = DVector::from_iterator(
                    self.dim,
                    coords.iter().map(|c| normal_quantile_coord(*c)),
                );
                Ok(gaussian_log_density(ell, &z))
            }
            Kind::StudentT { ell, dof, ln_norm } => {
                let x = DVector::from_iterator(
                    self.dim,
                    coords.iter().map(|c| student_t_quantile_coord(*c, *dof)),
                );
                Ok(student_t_log_density(ell, *dof, *ln_norm, &x))
            }
            _ => {
                let u: Vec<f64> = coords.iter().map(|c| c.value()).collect();
                self.log_density(&u)
            }
        }
    }

    /// Gradient of `log c` with respect to `u`: analytic for the elliptical
    /// families, central finite differences for the Archimedean ones.
    pub fn log_density_grad(&self, u: &[f64]) -> Result<DVector<f64>> {
        self.check_point(u)?;
        match &self.kind {
            Kind::Independence => Ok(DVector::zeros(self.dim)),
            Kind::Gaussian(ell) => {
                let (z, pdf): (Vec<f64>, Vec<f64>) = {
                    let mut z = Vec::with_capacity(self.dim);
                    let mut p = Vec::with_capacity(self.dim);
                    for &uj in u {
                        let zj = normal_quantile(uj)?;
                        z.push(zj);
                        p.push(normal_pdf(zj));
                    }
                    (z, p)
                };
                let zv = DVector::from_vec(z);
                let w = pm_i_times(&ell.precision, &zv);
                Ok(DVector::from_iterator(
                    self.dim,
                    (0..self.dim).map(|j| -w[j] / pdf[j]),
                ))
            }
            Kind::StudentT { ell, dof, .. } => {
                let x = self.t_scores(u, *dof)?;
                let (g, _) = t_log_density_grad_x(ell, *dof, &x);
                Ok(DVector::from_iterator(
                    self.dim,
                    (0..self.dim).map(|j| g[j] / student_t_ln_pdf(x[j], *dof).exp()),
                ))
            }
            _ => self.fd_grad(u),
        }
    }

    /// Hessian of `log c` with respect to `u`.
    pub fn log_density_hessian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(u)?;
        match &self.kind {
            Kind::Independence => Ok(DMatrix::zeros(self.dim, self.dim)),
            Kind::Gaussian(ell) => {
                let d = self.dim;
                let mut z = DVector::zeros(d);
                let mut pdf = vec![0.0; d];
                for (j, &uj) in u.iter().enumerate() {
                    z[j] = normal_quantile(uj)?;
                    pdf[j] = normal_pdf(z[j]);
                }
                let w = pm_i_times(&ell.precision, &z);
                let mut h = DMatrix::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        let pmij = ell.precision[(i, j)] - if i == j { 1.0 } else { 0.0 };
                        h[(i, j)] = -pmij / (pdf[i] * pdf[j]);
                    }
                    // Extra diagonal term from differentiating 1/phi(z_i).
                    h[(i, i)] -= w[i] * z[i] / (pdf[i] * pdf[i]);
                }
                Ok(h)
            }
            Kind::StudentT { ell, dof, .. } => {
                let d = self.dim;
                let nu = *dof;
                let x = self.t_scores(u, nu)?;
                let pdf: Vec<f64> = (0..d).map(|j| student_t_ln_pdf(x[j], nu).exp()).collect();
                let (g, q) = t_log_density_grad_x(ell, nu, &x);
                let px = &ell.precision * &x;
                let denom = nu + q;
                let mut h = DMatrix::zeros(d, d);
                for i in 0..d {
                    for j in 0..d {
                        let joint = -(nu + d as f64)
                            * (ell.precision[(i, j)] * denom - 2.0 * px[i] * px[j])
                            / (denom * denom);
                        let marg = if i == j {
                            (nu + 1.0) * (nu - x[j] * x[j]) / ((nu + x[j] * x[j]) * (nu + x[j] * x[j]))
                        } else {
                            0.0
                        };
                        h[(i, j)] = (joint + marg) / (pdf[i] * pdf[j]);
                    }
                    // d(1/f)/du = (nu+1) x / (nu + x^2) / f^2.
                    h[(i, i)] += g[i] * (nu + 1.0) * x[i] / ((nu + x[i] * x[i]) * pdf[i] * pdf[i]);
                }
                Ok(h)
            }
            _ => self.fd_hessian(u),
        }
    }

    fn t_scores(&self, u: &[f64], dof: f64) -> Result<DVector<f64>> {
        let mut x = DVector::zeros(self.dim);
        for (j, &uj) in u.iter().enumerate() {
            x[j] = student_t_quantile(uj, dof)?;
        }
        Ok(x)
    }

    fn fd_step(u: f64) -> f64 {
        let h = (1e-6_f64).max(1e-6 * u.min(1.0 - u));
        // Stay strictly inside the unit interval near the boundary.
        h.min(0.45 * u.min(1.0 - u))
    }

    fn fd_grad(&self, u: &[f64]) -> Result<DVector<f64>> {
        let mut g = DVector::zeros(self.dim);
        let mut up = u.to_vec();
        for j in 0..self.dim {
            let h = Self::fd_step(u[j]);
            up[j] = u[j] + h;
            let fp = self.log_density(&up)?;
            up[j] = u[j] - h;
            let fm = self.log_density(&up)?;
            up[j] = u[j];
            g[j] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }

    fn fd_hessian(&self, u: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let mut h = DMatrix::zeros(d, d);
        let f0 = self.log_density(u)?;
        let mut w = u.to_vec();
        for i in 0..d {
            let hi = Self::fd_step(u[i]);
            w[i] = u[i] + hi;
            let fp = self.log_density(&w)?;
            w[i] = u[i] - hi;
            let fm = self.log_density(&w)?;
            w[i] = u[i];
            h[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
            for j in (i + 1)..d {
                let hj = Self::fd_step(u[j]);
                let mut eval = |si: f64, sj: f64| -> Result<f64> {
                    w[i] = u[i] + si * hi;
                    w[j] = u[j] + sj * hj;
                    let v = self.log_density(&w);
                    w[i] = u[i];
                    w[j] = u[j];
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

    /// Draw `n` i.i.d. points (rows) with uniform marginals; deterministic for
    /// a given RNG stream.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<DMatrix<f64>> {
        if n == 0 {
            return Err(Error::argument("sample count must be at least 1"));
        }
        let d = self.dim;
        let mut out = DMatrix::zeros(n, d);
        match &self.kind {
            Kind::Independence => {
                for i in 0..n {
                    for j in 0..d {
                        out[(i, j)] = interior_uniform(rng);
                    }
                }
            }
            Kind::Gaussian(ell) => {
                let mut w = DVector::zeros(d);
                for i in 0..n {
                    for j in 0..d {
                        w[j] = StandardNormal.sample(rng);
                    }
                    let z = &ell.chol * &w;
                    for j in 0..d {
                        out[(i, j)] = clamp_unit(normal_cdf(z[j]));
                    }
                }
            }
            Kind::StudentT { ell, dof, .. } => {
                let chi = ChiSquared::new(*dof).map_err(|e| Error::parameter(e.to_string()))?;
                let mut w = DVector::zeros(d);
                for i in 0..n {
                    for j in 0..d {
                        w[j] = StandardNormal.sample(rng);
                    }
                    let z = &ell.chol * &w;
                    let s = (dof / chi.sample(rng)).sqrt();
                    for j in 0..d {
                        out[(i, j)] = clamp_unit(student_t_cdf(z[j] * s, *dof));
                    }
                }
            }
            Kind::Clayton { phi } => {
                for i in 0..n {
                    let (u, v) = archimedean::sample_clayton(*phi, rng);
                    out[(i, 0)] = clamp_unit(u);
                    out[(i, 1)] = clamp_unit(v);
                }
            }
            Kind::Gumbel { theta } => {
                for i in 0..n {
                    let (u, v) = archimedean::sample_gumbel(*theta, rng);
                    out[(i, 0)] = clamp_unit(u);
                    out[(i, 1)] = clamp_unit(v);
                }
            }
            Kind::Frank { theta } => {
                for i in 0..n {
                    let (u, v) = archimedean::sample_frank(*theta, rng);
                    out[(i, 0)] = clamp_unit(u);
                    out[(i, 1)] = clamp_unit(v);
                }
            }
        }
        Ok(out)
    }
}

fn bivariate_corr(rho: f64) -> Result<DMatrix<f64>> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::parameter(format!("correlation must lie in (-1,1), got {rho}")));
    }
    Ok(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
}

/// `(P - I) z` where `P` is the precision matrix.
fn pm_i_times(precision: &DMatrix<f64>, z: &DVector<f64>) -> DVector<f64> {
    precision * z - z
}

fn gaussian_log_density(ell: &Elliptical, z: &DVector<f64>) -> f64 {
    let q = z.dot(&(&ell.precision * z));
    -0.5 * ell.ln_det - 0.5 * (q - z.norm_squared())
}

fn student_t_log_density(ell: &Elliptical, dof: f64, ln_norm: f64, x: &DVector<f64>) -> f64 {
    let d = x.len() as f64;
    let q = x.dot(&(&ell.precision * x));
    let marg: f64 = x.iter().map(|&xi| (xi * xi / dof).ln_1p()).sum();
    ln_norm - 0.5 * ell.ln_det - 0.5 * (dof + d) * (q / dof).ln_1p() + 0.5 * (dof + 1.0) * marg
}

/// Gradient of the t-copula log-density with respect to the t scores `x`,
/// returned together with the quadratic form `x' P x`.
fn t_log_density_grad_x(ell: &Elliptical, dof: f64, x: &DVector<f64>) -> (DVector<f64>, f64) {
    let d = x.len() as f64;
    let px = &ell.precision * x;
    let q = x.dot(&px);
    let mut g = DVector::zeros(x.len());
    for j in 0..x.len() {
        g[j] = -(dof + d) * px[j] / (dof + q) + (dof + 1.0) * x[j] / (dof + x[j] * x[j]);
    }
    (g, q)
}

fn interior_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

fn clamp_unit(u: f64) -> f64 {
    u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Kendall's tau of an elliptical copula: `tau = 2 asin(rho) / pi`.
pub fn rho_to_tau(rho: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::domain(format!("correlation must lie in (-1,1), got {rho}")));
    }
    Ok(2.0 * rho.asin() / std::f64::consts::PI)
}

/// Inverse of [`rho_to_tau`]: `rho = sin(pi tau / 2)`.
pub fn tau_to_rho(tau: f64) -> Result<f64> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(Error::domain(format!("tau must lie in (-1,1), got {tau}")));
    }
    Ok((std::f64::consts::FRAC_PI_2 * tau).sin())
}

/// Kendall's tau implied by an Archimedean generator parameter.
pub fn archimedean_param_to_tau(family: CopulaFamily, param: f64) -> Result<f64> {
    match family {
        CopulaFamily::Clayton => {
            if !(param >= 0.0) {
                return Err(Error::domain(format!("clayton parameter must be >= 0, got {param}")));
            }
            Ok(param / (param + 2.0))
        }
        CopulaFamily::Gumbel => {
            if !(param >= 1.0) {
                return Err(Error::domain(format!("gumbel parameter must be >= 1, got {param}")));
            }
            Ok(1.0 - 1.0 / param)
        }
        CopulaFamily::Frank => {
            if !param.is_finite() {
                return Err(Error::domain("frank parameter must be finite"));
            }
            if param == 0.0 {
                return Ok(0.0);
            }
            let t = param.abs();
            let tau = 1.0 - 4.0 / t * (1.0 - crate::special::debye1(t));
            Ok(if param > 0.0 { tau } else { -tau })
        }
        other => Err(Error::Unsupported(format!("{other} is not an Archimedean family"))),
    }
}
