//! Two-dimensional kernel density estimation with product Gaussian kernels.
//!
//! Points are linearly binned onto the evaluation grid and the kernel applied
//! as two separable one-dimensional convolutions, which keeps the cost at
//! grid-size times kernel-width instead of grid-size times sample-size.

use crate::error::{Error, Result};
use crate::special::SQRT_2PI;
use nalgebra::DMatrix;

/// Evaluation grid: `nx` by `ny` cells, optionally with explicit bounds
/// `[x_lo, x_hi, y_lo, y_hi]`; by default the data range padded by three
/// bandwidths per side.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub bounds: Option<[f64; 4]>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { nx: 150, ny: 150, bounds: None }
    }
}

/// A density surface on a rectangular grid of cell centers.
#[derive(Clone, Debug)]
pub struct DensitySurface {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `values[(i, j)]` is the density at `(xs[i], ys[j])`.
    pub values: DMatrix<f64>,
    pub bandwidth: [f64; 2],
    pub cell_area: f64,
}

impl DensitySurface {
    pub fn bounds(&self) -> [f64; 4] {
        let dx = self.xs[1] - self.xs[0];
        let dy = self.ys[1] - self.ys[0];
        [
            self.xs[0] - 0.5 * dx,
            *self.xs.last().unwrap() + 0.5 * dx,
            self.ys[0] - 0.5 * dy,
            *self.ys.last().unwrap() + 0.5 * dy,
        ]
    }

    /// Bilinear interpolation between cell centers; `None` outside the grid's
    /// outer cell centers.
    pub fn interpolate(&self, x: f64, y: f64) -> Option<f64> {
        let nx = self.xs.len();
        let ny = self.ys.len();
        let dx = self.xs[1] - self.xs[0];
        let dy = self.ys[1] - self.ys[0];
        let fx = (x - self.xs[0]) / dx;
        let fy = (y - self.ys[0]) / dy;
        if !(0.0..=(nx - 1) as f64).contains(&fx) || !(0.0..=(ny - 1) as f64).contains(&fy) {
            return None;
        }
        let i = (fx as usize).min(nx - 2);
        let j = (fy as usize).min(ny - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        Some(
            self.values[(i, j)] * (1.0 - tx) * (1.0 - ty)
                + self.values[(i + 1, j)] * tx * (1.0 - ty)
                + self.values[(i, j + 1)] * (1.0 - tx) * ty
                + self.values[(i + 1, j + 1)] * tx * ty,
        )
    }

    /// Grid-quadrature mass (should be close to 1).
    pub fn total_mass(&self) -> f64 {
        self.values.sum() * self.cell_area
    }
}

/// Normal-reference bandwidth: `1.06 min(sd, iqr/1.34) m^{-1/5}` per axis.
fn reference_bandwidth(values: &[f64]) -> Result<f64> {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    let sd = var.sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| -> f64 {
        let idx = p * (sorted.len() - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        let frac = idx - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    if !(spread > 0.0) {
        return Err(Error::domain("degenerate axis: zero spread in KDE input"));
    }
    Ok(1.06 * spread * m.powf(-0.2))
}

/// Product-Gaussian-kernel KDE of 2-D points (rows) on a rectangular grid.
pub fn kde2d(
    points: &DMatrix<f64>,
    grid: &GridSpec,
    bandwidth: Option<[f64; 2]>,
) -> Result<DensitySurface> {
    let m = points.nrows();
    if m < 20 {
        return Err(Error::argument(format!("KDE needs at least 20 points, got {m}")));
    }
    if points.ncols() != 2 {
        return Err(Error::argument("KDE input must be two-dimensional"));
    }
    if grid.nx < 4 || grid.ny < 4 {
        return Err(Error::argument("KDE grid must be at least 4x4"));
    }
    let xvals: Vec<f64> = points.column(0).iter().copied().collect();
    let yvals: Vec<f64> = points.column(1).iter().copied().collect();
    let bw = match bandwidth {
        Some(b) => {
            if !(b[0] > 0.0 && b[1] > 0.0) {
                return Err(Error::argument("bandwidths must be positive"));
            }
            b
        }
        None => [reference_bandwidth(&xvals)?, reference_bandwidth(&yvals)?],
    };

    let (x_lo, x_hi, y_lo, y_hi) = match grid.bounds {
        Some([a, b, c, d]) => {
            if !(a < b && c < d) {
                return Err(Error::argument("grid bounds must be ordered"));
            }
            (a, b, c, d)
        }
        None => {
            let (xmin, xmax) = min_max(&xvals);
            let (ymin, ymax) = min_max(&yvals);
            (xmin - 3.0 * bw[0], xmax + 3.0 * bw[0], ymin - 3.0 * bw[1], ymax + 3.0 * bw[1])
        }
    };

    let nx = grid.nx;
    let ny = grid.ny;
    let dx = (x_hi - x_lo) / nx as f64;
    let dy = (y_hi - y_lo) / ny as f64;
    let xs: Vec<f64> = (0..nx).map(|i| x_lo + (i as f64 + 0.5) * dx).collect();
    let ys: Vec<f64> = (0..ny).map(|j| y_lo + (j as f64 + 0.5) * dy).collect();

    // Linear binning onto cell centers.
    let mut counts: DMatrix<f64> = DMatrix::zeros(nx, ny);
    for r in 0..m {
        let fx = ((points[(r, 0)] - xs[0]) / dx).clamp(0.0, (nx - 1) as f64);
        let fy = ((points[(r, 1)] - ys[0]) / dy).clamp(0.0, (ny - 1) as f64);
        let i = (fx as usize).min(nx - 2);
        let j = (fy as usize).min(ny - 2);
        let tx = (fx - i as f64).clamp(0.0, 1.0);
        let ty = (fy - j as f64).clamp(0.0, 1.0);
        counts[(i, j)] += (1.0 - tx) * (1.0 - ty);
        counts[(i + 1, j)] += tx * (1.0 - ty);
        counts[(i, j + 1)] += (1.0 - tx) * ty;
        counts[(i + 1, j + 1)] += tx * ty;
    }

    // Separable convolution with the Gaussian kernel, truncated at five
    // bandwidths.
    let kernel = |h: f64, step: f64| -> Vec<f64> {
        let reach = ((5.0 * h / step).ceil() as usize).max(1);
        (0..=reach)
            .map(|k| {
                let z = k as f64 * step / h;
                (-0.5 * z * z).exp() / (h * SQRT_2PI)
            })
            .collect()
    };
    let kx = kernel(bw[0], dx);
    let ky = kernel(bw[1], dy);

    let mut stage: DMatrix<f64> = DMatrix::zeros(nx, ny);
    for j in 0..ny {
        for i in 0..nx {
            let w = counts[(i, j)];
            if w == 0.0 {
                continue;
            }
            let lo = i.saturating_sub(kx.len() - 1);
            let hi = (i + kx.len() - 1).min(nx - 1);
            for t in lo..=hi {
                stage[(t, j)] += w * kx[t.abs_diff(i)];
            }
        }
    }
    let mut values: DMatrix<f64> = DMatrix::zeros(nx, ny);
    for i in 0..nx {
        for j in 0..ny {
            let w = stage[(i, j)];
            if w == 0.0 {
                continue;
            }
            let lo = j.saturating_sub(ky.len() - 1);
            let hi = (j + ky.len() - 1).min(ny - 1);
            for t in lo..=hi {
                values[(i, t)] += w * ky[t.abs_diff(j)];
            }
        }
    }
    values /= m as f64;

    Ok(DensitySurface { xs, ys, values, bandwidth: bw, cell_area: dx * dy })
}

fn min_max(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn standard_normal_points(m: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, 2, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn density_at_origin_close_to_analytic() {
        let pts = standard_normal_points(10_000, 1);
        let surface = kde2d(&pts, &GridSpec::default(), None).unwrap();
        let peak = surface.interpolate(0.0, 0.0).unwrap();
        let analytic = 1.0 / (2.0 * std::f64::consts::PI);
        assert!(
            (peak - analytic).abs() / analytic < 0.15,
            "peak {peak} vs analytic {analytic}"
        );
    }

    #[test]
    fn surface_integrates_to_one() {
        let pts = standard_normal_points(5_000, 2);
        let surface = kde2d(&pts, &GridSpec::default(), None).unwrap();
        assert!((surface.total_mass() - 1.0).abs() < 1e-2, "mass {}", surface.total_mass());
    }

    #[test]
    fn doubling_bandwidth_lowers_the_peak() {
        let pts = standard_normal_points(5_000, 3);
        let narrow = kde2d(&pts, &GridSpec::default(), Some([0.2, 0.2])).unwrap();
        let wide = kde2d(&pts, &GridSpec::default(), Some([0.4, 0.4])).unwrap();
        let p_narrow = narrow.interpolate(0.0, 0.0).unwrap();
        let p_wide = wide.interpolate(0.0, 0.0).unwrap();
        assert!(p_wide < p_narrow, "narrow {p_narrow} wide {p_wide}");
    }

    #[test]
    fn degenerate_axis_is_an_error() {
        let mut pts = standard_normal_points(100, 4);
        for i in 0..100 {
            pts[(i, 1)] = 2.5;
        }
        assert!(kde2d(&pts, &GridSpec::default(), None).is_err());
    }

    #[test]
    fn too_few_points_rejected() {
        let pts = standard_normal_points(10, 5);
        assert!(kde2d(&pts, &GridSpec::default(), None).is_err());
    }

    #[test]
    fn binned_kde_close_to_direct_evaluation() {
        // Direct-sum oracle at a handful of query points.
        let pts = standard_normal_points(400, 6);
        let bw = [0.35, 0.35];
        let surface = kde2d(&pts, &GridSpec { nx: 200, ny: 200, bounds: None }, Some(bw)).unwrap();
        for &(qx, qy) in &[(0.0, 0.0), (0.5, -0.4), (-1.0, 1.2)] {
            let mut direct = 0.0;
            for r in 0..pts.nrows() {
                let zx = (qx - pts[(r, 0)]) / bw[0];
                let zy = (qy - pts[(r, 1)]) / bw[1];
                direct += (-0.5 * (zx * zx + zy * zy)).exp();
            }
            direct /= pts.nrows() as f64 * bw[0] * bw[1] * SQRT_2PI * SQRT_2PI;
            let binned = surface.interpolate(qx, qy).unwrap();
            assert!(
                (binned - direct).abs() / direct < 0.02,
                "at ({qx},{qy}): binned {binned} direct {direct}"
            );
        }
    }
}
