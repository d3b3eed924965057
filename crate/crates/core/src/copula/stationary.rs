//! Stationary points of the bivariate log-density ratio `log c2 - log c1`:
//! grid-seeded Newton root-finding on its gradient, with classification by
//! the eigenvalue signs of the Hessian.

use super::CopulaSpec;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Vector2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StationaryClass {
    Maximum,
    Minimum,
    Saddle,
}

#[derive(Clone, Debug)]
pub struct StationaryPoint {
    pub location: [f64; 2],
    pub class: StationaryClass,
    pub gradient_norm: f64,
}

#[derive(Clone, Debug)]
pub struct StationaryScan {
    pub points: Vec<StationaryPoint>,
    /// Set when the two copulas have identical log-densities on the seed
    /// grid, in which case every point is stationary and no roots are
    /// reported.
    pub degenerate: bool,
    pub skipped_seeds: usize,
}

const GRAD_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-6;
const EDGE: f64 = 1e-7;

/// Locate and classify the stationary points of `log c2(u) - log c1(u)` over
/// the open unit square, seeding Newton iterations from a `grid x grid`
/// uniform lattice.
pub fn classify_stationary_points(
    c1: &CopulaSpec,
    c2: &CopulaSpec,
    grid: usize,
) -> Result<StationaryScan> {
    if c1.dim() != 2 || c2.dim() != 2 {
        return Err(Error::Unsupported(
            "stationary-point classification is implemented for dimension 2 only".into(),
        ));
    }
    if grid < 2 {
        return Err(Error::argument("seed grid must be at least 2x2"));
    }

    let gradient = |u: &[f64; 2]| -> Result<DVector<f64>> {
        Ok(c2.log_density_grad(u)? - c1.log_density_grad(u)?)
    };
    let hessian = |u: &[f64; 2]| -> Result<DMatrix<f64>> {
        Ok(c2.log_density_hessian(u)? - c1.log_density_hessian(u)?)
    };

    // Degeneracy sweep: identical copulas make the ratio constant.
    let mut max_grad: f64 = 0.0;
    let mut seeds = Vec::with_capacity(grid * grid);
    for i in 1..=grid {
        for j in 1..=grid {
            let u = [i as f64 / (grid as f64 + 1.0), j as f64 / (grid as f64 + 1.0)];
            let g = gradient(&u)?;
            max_grad = max_grad.max(g.norm());
            seeds.push((u, g));
        }
    }
    if max_grad < 1e-12 {
        return Ok(StationaryScan { points: Vec::new(), degenerate: true, skipped_seeds: 0 });
    }

    let mut points: Vec<StationaryPoint> = Vec::new();
    let mut skipped = 0usize;
    'seed: for (seed, g0) in seeds {
        let mut u = Vector2::new(seed[0], seed[1]);
        let mut g = Vector2::new(g0[0], g0[1]);
        let mut converged = false;
        for _ in 0..80 {
            if g.norm() < GRAD_TOL {
                converged = true;
                break;
            }
            let arr = [u[0], u[1]];
            let h = hessian(&arr)?;
            let det = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
            if det.abs() < 1e-300 {
                break;
            }
            let mut step = Vector2::new(
                -(h[(1, 1)] * g[0] - h[(0, 1)] * g[1]) / det,
                -(h[(0, 0)] * g[1] - h[(1, 0)] * g[0]) / det,
            );
            let len = step.norm();
            if len > 0.25 {
                step *= 0.25 / len;
            }
            u += step;
            if u[0] <= EDGE || u[0] >= 1.0 - EDGE || u[1] <= EDGE || u[1] >= 1.0 - EDGE {
                skipped += 1;
                continue 'seed;
            }
            let arr = [u[0], u[1]];
            let gn = gradient(&arr)?;
            g = Vector2::new(gn[0], gn[1]);
        }
        if !converged && g.norm() >= GRAD_TOL {
            skipped += 1;
            continue;
        }
        if points
            .iter()
            .any(|p| (p.location[0] - u[0]).hypot(p.location[1] - u[1]) < DEDUP_TOL)
        {
            continue;
        }
        let arr = [u[0], u[1]];
        let h = hessian(&arr)?;
        let eig = nalgebra::SymmetricEigen::new(
            nalgebra::Matrix2::new(h[(0, 0)], 0.5 * (h[(0, 1)] + h[(1, 0)]), 0.5 * (h[(0, 1)] + h[(1, 0)]), h[(1, 1)]),
        );
        let l0 = eig.eigenvalues[0];
        let l1 = eig.eigenvalues[1];
        let scale = l0.abs().max(l1.abs());
        if scale == 0.0 || l0.abs() < 1e-8 * scale || l1.abs() < 1e-8 * scale {
            skipped += 1;
            continue;
        }
        let class = if l0 < 0.0 && l1 < 0.0 {
            StationaryClass::Maximum
        } else if l0 > 0.0 && l1 > 0.0 {
            StationaryClass::Minimum
        } else {
            StationaryClass::Saddle
        };
        points.push(StationaryPoint { location: [u[0], u[1]], class, gradient_norm: g.norm() });
    }

    points.sort_by(|a, b| {
        a.location[0]
            .total_cmp(&b.location[0])
            .then(a.location[1].total_cmp(&b.location[1]))
    });
    Ok(StationaryScan { points, degenerate: false, skipped_seeds: skipped })
}
