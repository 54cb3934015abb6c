//! Gaussian fields driven by the noise: exact covariances, exact samplers and
//! sup-norm bounds.

pub mod budget;
pub mod covariance;
pub mod limit;
pub mod modes;

pub use budget::{sup_norm_budget, BudgetConstants, SupNormBudget};
pub use covariance::{
    cov_limit_y, cov_x_asymptotic, cov_x_exact, cov_z_eps, cov_z_line, critical_time, delta_xy_bound, delta_xy_variance, increment_var_x,
    increment_var_x_asymptote, laplace_integral, variance_z_line, CovarianceGrid, Provenance,
};
pub use limit::{sample_limit_y, LimitSampler};
pub use modes::{evolve_z_path, sample_z_snapshot, OuModeSet, PathSampler, SnapshotSampler};
