//! Bivariate Archimedean copula densities and samplers.
//!
//! Clayton and Frank are sampled by conditional inversion (closed-form
//! conditional quantiles); Gumbel through its positive-stable frailty
//! (Kanter's representation).

use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Clayton log-density, `phi >= 0`; `phi = 0` is the independence copula.
pub(super) fn clayton_log_density(phi: f64, u: f64, v: f64) -> f64 {
    if phi == 0.0 {
        return 0.0;
    }
    // log(u^-phi + v^-phi - 1) evaluated in log space to survive tiny u, v.
    let a = -phi * u.ln();
    let b = -phi * v.ln();
    let m = a.max(b);
    let log_sum = m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln();
    (1.0 + phi).ln() - (phi + 1.0) * (u.ln() + v.ln()) - (2.0 + 1.0 / phi) * log_sum
}

/// Gumbel log-density, `theta >= 1`; `theta = 1` is the independence copula.
pub(super) fn gumbel_log_density(theta: f64, u: f64, v: f64) -> f64 {
    if theta == 1.0 {
        return 0.0;
    }
    let x = -u.ln();
    let y = -v.ln();
    let ln_a = log_sum_pow(x, y, theta);
    let s = (ln_a / theta).exp();
    -s + (theta - 1.0) * (x.ln() + y.ln()) + (x + y) + (1.0 / theta - 2.0) * ln_a
        + (s + theta - 1.0).ln()
}

/// `log(x^theta + y^theta)` without overflow.
fn log_sum_pow(x: f64, y: f64, theta: f64) -> f64 {
    let lx = theta * x.ln();
    let ly = theta * y.ln();
    let m = lx.max(ly);
    m + ((lx - m).exp() + (ly - m).exp()).ln()
}

/// Frank log-density, any finite `theta`; `theta = 0` is independence.
pub(super) fn frank_log_density(theta: f64, u: f64, v: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let one_m_et = -(-theta).exp_m1(); // 1 - e^{-theta}
    let denom = one_m_et - (-theta * u).exp_m1() * (-theta * v).exp_m1();
    (theta * one_m_et).ln() - theta * (u + v) - 2.0 * denom.abs().ln()
}

pub(super) fn sample_clayton<R: Rng + ?Sized>(phi: f64, rng: &mut R) -> (f64, f64) {
    let u: f64 = rng.random();
    let t: f64 = rng.random();
    if phi == 0.0 {
        return (u, t);
    }
    let v = (u.powf(-phi) * (t.powf(-phi / (1.0 + phi)) - 1.0) + 1.0).powf(-1.0 / phi);
    (u, v)
}

pub(super) fn sample_gumbel<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> (f64, f64) {
    if theta == 1.0 {
        return (rng.random(), rng.random());
    }
    let alpha = 1.0 / theta;
    // Positive alpha-stable frailty with Laplace transform exp(-s^alpha).
    let angle: f64 = rng.random::<f64>() * std::f64::consts::PI;
    let w: f64 = Exp1.sample(rng);
    let a = (alpha * angle).sin().powf(alpha / (1.0 - alpha)) * ((1.0 - alpha) * angle).sin()
        / angle.sin().powf(1.0 / (1.0 - alpha));
    let frailty = (a / w).powf((1.0 - alpha) / alpha);
    let e1: f64 = Exp1.sample(rng);
    let e2: f64 = Exp1.sample(rng);
    ((-(e1 / frailty).powf(alpha)).exp(), (-(e2 / frailty).powf(alpha)).exp())
}

pub(super) fn sample_frank<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> (f64, f64) {
    let u: f64 = rng.random();
    let t: f64 = rng.random();
    if theta == 0.0 {
        return (u, t);
    }
    let emu = (-theta * u).exp();
    let v = -(1.0 / theta) * (t * (-theta).exp_m1() / (emu - t * (emu - 1.0))).ln_1p();
    (u, v)
}
