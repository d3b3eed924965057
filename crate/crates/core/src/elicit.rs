//! Quartile-based beta elicitation: reconcile three elicited quartiles into a
//! two-parameter beta distribution by least squares on CDF residuals.

use crate::error::{Error, Result};
use crate::marginal::MarginalPrior;

/// Result of a quartile fit.
#[derive(Clone, Debug)]
pub struct BetaFit {
    pub prior: MarginalPrior,
    /// Sum of squared CDF residuals at the three quartiles.
    pub residual: f64,
    pub iterations: usize,
}

/// Fit a `Beta(alpha, beta)` to elicited quartiles by minimizing
/// `sum_k (F(q_k; alpha, beta) - k/4)^2` with equal weights, via
/// Levenberg-Marquardt on the log-parameters from a moment-matched start.
pub fn fit_beta_from_quartiles(q25: f64, q50: f64, q75: f64) -> Result<BetaFit> {
    if !(0.0 < q25 && q25 < q50 && q50 < q75 && q75 < 1.0) {
        return Err(Error::argument(format!(
            "quartiles must satisfy 0 < q25 < q50 < q75 < 1, got ({q25}, {q50}, {q75})"
        )));
    }

    // Moment-matched start: median for the mean, normal-scaled IQR for the
    // spread.
    let mean = q50.clamp(0.02, 0.98);
    let sd = ((q75 - q25) / 1.349).max(1e-3);
    let var = (sd * sd).min(0.9 * mean * (1.0 - mean));
    let scale = mean * (1.0 - mean) / var - 1.0;
    let mut log_a = (mean * scale).max(0.05).ln();
    let mut log_b = ((1.0 - mean) * scale).max(0.05).ln();

    let targets = [0.25, 0.5, 0.75];
    let qs = [q25, q50, q75];
    let residuals = |la: f64, lb: f64| -> Result<[f64; 3]> {
        let prior = MarginalPrior::beta(la.exp(), lb.exp())?;
        let mut r = [0.0; 3];
        for k in 0..3 {
            r[k] = prior.cdf(qs[k]) - targets[k];
        }
        Ok(r)
    };
    let sum_sq = |r: &[f64; 3]| r.iter().map(|v| v * v).sum::<f64>();

    let mut r = residuals(log_a, log_b)?;
    let mut obj = sum_sq(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0usize;
    let h = 1e-6;

    for iter in 0..200 {
        iterations = iter + 1;
        // Jacobian of the residuals in the log-parameters.
        let rp_a = residuals(log_a + h, log_b)?;
        let rm_a = residuals(log_a - h, log_b)?;
        let rp_b = residuals(log_a, log_b + h)?;
        let rm_b = residuals(log_a, log_b - h)?;
        let mut j = [[0.0f64; 2]; 3];
        for k in 0..3 {
            j[k][0] = (rp_a[k] - rm_a[k]) / (2.0 * h);
            j[k][1] = (rp_b[k] - rm_b[k]) / (2.0 * h);
        }
        // Normal equations J'J + lambda diag(J'J), J'r.
        let mut jtj = [[0.0f64; 2]; 2];
        let mut jtr = [0.0f64; 2];
        for k in 0..3 {
            for a in 0..2 {
                for b in 0..2 {
                    jtj[a][b] += j[k][a] * j[k][b];
                }
                jtr[a] += j[k][a] * r[k];
            }
        }
        let grad_norm = (jtr[0] * jtr[0] + jtr[1] * jtr[1]).sqrt();
        if grad_norm < 1e-10 || obj < 1e-24 {
            break;
        }
        let mut improved = false;
        for _ in 0..25 {
            let a00 = jtj[0][0] * (1.0 + lambda);
            let a11 = jtj[1][1] * (1.0 + lambda);
            let a01 = jtj[0][1];
            let det = a00 * a11 - a01 * a01;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let da = -(a11 * jtr[0] - a01 * jtr[1]) / det;
            let db = -(a00 * jtr[1] - a01 * jtr[0]) / det;
            let cand_a = log_a + da;
            let cand_b = log_b + db;
            match residuals(cand_a, cand_b) {
                Ok(rc) => {
                    let oc = sum_sq(&rc);
                    if oc < obj {
                        log_a = cand_a;
                        log_b = cand_b;
                        r = rc;
                        obj = oc;
                        lambda = (lambda * 0.3).max(1e-12);
                        improved = true;
                        break;
                    }
                    lambda *= 10.0;
                }
                Err(_) => lambda *= 10.0,
            }
            if lambda > 1e12 {
                break;
            }
        }
        if !improved {
            break;
        }
    }

    let prior = MarginalPrior::beta(log_a.exp(), log_b.exp())?;
    if obj > 1e-4 {
        return Err(Error::numerical(format!(
            "quartile fit did not converge: residual {obj:.3e} at {prior}"
        )));
    }
    Ok(BetaFit { prior, residual: obj, iterations })
}
