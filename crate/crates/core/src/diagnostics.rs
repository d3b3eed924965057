//! The dependence-retention diagnostic: compare a prior's D-vine Kendall tau
//! values against the limiting Gaussian-copula tau structure induced by the
//! inverse Fisher information over the design prior's support.
//!
//! A prior dependence structure is chronically rejected when no probed
//! parameter value induces a tau structure matching the prior's edge taus;
//! the check is sufficient, not necessary, for non-retention.

use crate::copula::rho_to_tau;
use crate::error::{Error, Result};
use crate::fisher::inverse_fisher;
use crate::model::ModelSpec;
use crate::prior::CopulaPrior;
use crate::vine::{DVine, VineEdge};
use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

/// Limiting Kendall tau values per vine edge, derived from a covariance
/// matrix via partial correlations.
#[derive(Clone, Debug)]
pub struct InducedTauStructure {
    /// Per-edge (label, tau) in the vine's canonical edge order.
    pub taus: Vec<(String, f64)>,
}

/// Outcome of the chronic-rejection check.
#[derive(Clone, Debug, Serialize)]
pub struct RejectionVerdict {
    pub chronically_rejected: bool,
    /// Minimum over probed parameters of the maximum per-edge tau gap.
    pub worst_case_gap: f64,
    pub probed_points: usize,
    pub tolerance: f64,
    /// The probe achieving the smallest gap, for auditability.
    pub nearest_match: Vec<f64>,
    pub nearest_match_gap: f64,
}

/// How to probe the support of the design prior.
pub enum SupportProbe {
    /// Explicit list of parameter points.
    Explicit(Vec<Vec<f64>>),
    /// Draw `count` points from the design prior.
    PriorSample { prior: CopulaPrior, count: usize },
    /// Uniform grid with `per_dim` points per axis over a box.
    Grid { lower: Vec<f64>, upper: Vec<f64>, per_dim: usize },
}

/// Kendall tau structure induced on a D-vine by the Gaussian copula whose
/// covariance is `sigma`: each edge's partial correlation, mapped through
/// `tau = 2 asin(rho) / pi`. The structure depends only on the correlation
/// shape of `sigma`, not its scale.
pub fn induced_tau(sigma: &DMatrix<f64>, vine: &DVine) -> Result<InducedTauStructure> {
    let d = vine.dim();
    if sigma.nrows() != d || sigma.ncols() != d {
        return Err(Error::argument(format!(
            "covariance is {}x{} but the vine has {d} variables",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    if !is_symmetric(sigma) {
        return Err(Error::parameter("covariance must be symmetric"));
    }
    let mut taus = Vec::with_capacity(vine.edge_count());
    for edge in vine.edges() {
        let rho = partial_correlation(sigma, edge)?;
        taus.push((edge.label(), rho_to_tau(rho.clamp(-1.0 + 1e-15, 1.0 - 1e-15))?));
    }
    Ok(InducedTauStructure { taus })
}

/// Partial correlation of the edge's conditioned pair given its conditioning
/// set, from the precision matrix of the restricted covariance block.
fn partial_correlation(sigma: &DMatrix<f64>, edge: &VineEdge) -> Result<f64> {
    let mut idx = vec![edge.first, edge.second];
    idx.extend_from_slice(&edge.conditioning);
    let k = idx.len();
    let mut block = DMatrix::zeros(k, k);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            block[(a, b)] = sigma[(i, j)];
        }
    }
    let precision = nalgebra::Cholesky::new(block)
        .ok_or_else(|| Error::parameter("covariance block is not positive definite"))?
        .inverse();
    Ok(-precision[(0, 1)] / (precision[(0, 0)] * precision[(1, 1)]).sqrt())
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let scale = m[(i, j)].abs().max(m[(j, i)].abs()).max(1.0);
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 * scale {
                return false;
            }
        }
    }
    true
}

/// Check whether the prior vine's tau structure can be matched by the
/// limiting structure induced at any probed parameter. The verdict is
/// `chronically_rejected` unless some probe matches every edge tau within
/// `tolerance`.
pub fn chronic_rejection_check<R: Rng + ?Sized>(
    prior_vine: &DVine,
    model: &ModelSpec,
    probe: &SupportProbe,
    tolerance: f64,
    rng: &mut R,
) -> Result<RejectionVerdict> {
    if !(tolerance > 0.0) {
        return Err(Error::argument("tolerance must be positive"));
    }
    if prior_vine.dim() != model.dim() {
        return Err(Error::argument(format!(
            "vine dimension {} does not match model dimension {}",
            prior_vine.dim(),
            model.dim()
        )));
    }
    let points = probe_points(probe, model.dim(), rng)?;
    if points.is_empty() {
        return Err(Error::argument("empty probe set"));
    }
    for p in &points {
        if !model.contains_interior(p) {
            return Err(Error::domain(format!("probe point {p:?} is not interior")));
        }
    }

    let mut best_gap = f64::INFINITY;
    let mut best_point = points[0].clone();
    for point in &points {
        let sigma = inverse_fisher(model, point)?;
        let induced = induced_tau(&sigma, prior_vine)?;
        let gap = prior_vine
            .edges()
            .iter()
            .zip(&induced.taus)
            .map(|(edge, (_, tau))| (edge.tau - tau).abs())
            .fold(0.0_f64, f64::max);
        if gap < best_gap {
            best_gap = gap;
            best_point = point.clone();
        }
    }

    Ok(RejectionVerdict {
        chronically_rejected: best_gap > tolerance,
        worst_case_gap: best_gap,
        probed_points: points.len(),
        tolerance,
        nearest_match: best_point,
        nearest_match_gap: best_gap,
    })
}

fn probe_points<R: Rng + ?Sized>(
    probe: &SupportProbe,
    dim: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    match probe {
        SupportProbe::Explicit(points) => Ok(points.clone()),
        SupportProbe::PriorSample { prior, count } => {
            if *count == 0 {
                return Err(Error::argument("probe sample count must be positive"));
            }
            if prior.dim() != dim {
                return Err(Error::argument("probe prior dimension mismatch"));
            }
            let draws = prior.sample(*count, rng)?;
            Ok((0..*count).map(|i| (0..dim).map(|j| draws[(i, j)]).collect()).collect())
        }
        SupportProbe::Grid { lower, upper, per_dim } => {
            if lower.len() != dim || upper.len() != dim {
                return Err(Error::argument("probe grid bounds dimension mismatch"));
            }
            if *per_dim == 0 {
                return Err(Error::argument("probe grid needs at least one point per axis"));
            }
            let mut points = vec![Vec::new()];
            for j in 0..dim {
                if !(lower[j] < upper[j]) {
                    return Err(Error::argument("probe grid bounds must be ordered"));
                }
                let mut next = Vec::with_capacity(points.len() * per_dim);
                for base in &points {
                    for k in 0..*per_dim {
                        let frac = (k as f64 + 0.5) / *per_dim as f64;
                        let mut p = base.clone();
                        p.push(lower[j] + frac * (upper[j] - lower[j]));
                        next.push(p);
                    }
                }
                points = next;
            }
            Ok(points)
        }
    }
}

/// Default number of design-prior draws used to probe the support.
pub const DEFAULT_PROBE_DRAWS: usize = 512;
/// Default tau tolerance converting exact equality into a checkable condition.
pub const DEFAULT_TAU_TOLERANCE: f64 = 0.01;
