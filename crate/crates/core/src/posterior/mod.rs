//! Posterior computation: sampling-resampling with conjugate or Laplace
//! proposals, 2-D kernel density estimation, HPD sets with quasi-Monte Carlo
//! areas, and posterior-mode finding.

mod density;
mod hpd;
mod kde;
mod mode;
mod sir;

pub use density::PosteriorDensity;
pub use hpd::{hpd_region, HpdResult};
pub use kde::{kde2d, DensitySurface, GridSpec};
pub use mode::{one_step_newton_mode, posterior_mode, ModePair, NewtonOptions, Objective};
pub use sir::{conjugate_proposal, sir_posterior, PosteriorSample, Proposal, SirSizes};
