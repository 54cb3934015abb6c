//! Sampling the limit process with covariance `e^{-(r-r')²/2}`.

use crate::error::{domain, Error, Result};
use crate::gaussian::covariance::cov_limit_y;
use crate::rng::rng_from;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Diagonal nugget added before factorization.
pub const NUGGET: f64 = 1e-12;
/// Largest grid accepted by the Cholesky route.
pub const MAX_POINTS: usize = 4096;

/// Cholesky factor of the limit covariance on a fixed grid.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    pub grid: Vec<f64>,
    factor: DMatrix<f64>,
}

impl LimitSampler {
    pub fn new(grid: &[f64]) -> Result<Self> {
        let n = grid.len();
        if n == 0 {
            return domain("limit sampler needs at least one point");
        }
        if n > MAX_POINTS {
            return domain(format!("grid of {n} points exceeds the Cholesky limit of {MAX_POINTS}"));
        }
        let c = DMatrix::from_fn(n, n, |i, j| cov_limit_y(grid[i] - grid[j]) + if i == j { NUGGET } else { 0.0 });
        let chol = c.cholesky().ok_or(Error::Factorization { points: n })?;
        Ok(Self { grid: grid.to_vec(), factor: chol.l() })
    }

    pub fn sample_with<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.grid.len();
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        (&self.factor * z).iter().copied().collect()
    }

    pub fn sample(&self, seed: u64) -> Vec<f64> {
        self.sample_with(&mut rng_from(seed))
    }
}

/// One draw of the limit process on `grid`.
pub fn sample_limit_y(grid: &[f64], seed: u64) -> Result<Vec<f64>> {
    Ok(LimitSampler::new(grid)?.sample(seed))
}
