//! Exact samplers for `Z_eps` through its sine-mode decomposition.
//!
//! Mode `n` of `Z_eps` is an Ornstein-Uhlenbeck coefficient with rate
//! `μ_n = 1 - λ_n` and variance `v_n(t) = (e^{2μ_n t} - 1)/(2μ_n)`, multiplying
//! `φ_n(x) = L^{-1/2} sin(nπ(x+L)/(2L))`. On a uniform grid with `M` intervals,
//! `φ_n` at the nodes equals `±φ_r` for the alias `r` of `n` modulo `2M`, so a
//! snapshot only needs the alias-class variance sums.

use crate::error::{domain, Error, Result};
use crate::kernels::KernelParams;
use crate::rng::rng_from;
use crate::solver::dst::SineTransform;
use crate::solver::Field;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Relative tail tolerance for snapshots.
pub const SNAPSHOT_REL_TOL: f64 = 1e-8;
/// Relative tail tolerance for paths, which carry every mode explicitly.
pub const PATH_REL_TOL: f64 = 1e-4;
/// Hard cap on the number of modes the tail search will consider.
pub const MAX_MODES: usize = 400_000_000;

/// `v(t) = (e^{2μt} - 1)/(2μ)`, with its Taylor series near `μ = 0`.
pub fn ou_variance(mu: f64, t: f64) -> f64 {
    if mu.abs() < 1e-8 {
        let x = mu * t;
        t * (1.0 + x + 2.0 / 3.0 * x * x)
    } else {
        (2.0 * mu * t).exp_m1() / (2.0 * mu)
    }
}

/// Bound on `sup_x Σ_{n>N} v_n(t) φ_n(x)²`, valid for every `t` once `λ_{N+1} > 1`.
pub fn tail_bound(l: f64, n: usize) -> f64 {
    let sa = PI / (8.0f64.sqrt() * l) * n as f64;
    if sa <= 1.0 {
        return f64::INFINITY;
    }
    let sqrt_a = PI / (8.0f64.sqrt() * l);
    ((sa + 1.0) / (sa - 1.0)).ln() / (4.0 * sqrt_a * l)
}

/// Smallest `N` whose tail bound is below `tol_rel` times the spatially averaged
/// retained variance at time `t`.
pub fn required_modes(l: f64, t: f64, tol_rel: f64) -> Result<usize> {
    if !(t > 0.0) {
        return domain(format!("sampling time must be positive, got {t}"));
    }
    let p = KernelParams::new(l)?;
    let mut acc = 0.0;
    let mut n = 0usize;
    while n < MAX_MODES {
        n += 1;
        acc += ou_variance(1.0 - p.lambda(n), t);
        if tail_bound(l, n) <= tol_rel * acc / (2.0 * l) {
            return Ok(n);
        }
    }
    domain(format!("tail tolerance {tol_rel} needs more than {MAX_MODES} modes at t = {t}"))
}

fn resolve_modes(required: usize, p: &KernelParams) -> Result<usize> {
    match p.n_max {
        Some(given) if given < required => Err(Error::InsufficientModes { required, given }),
        Some(given) => Ok(given),
        None => Ok(required),
    }
}

/// Coefficients of the retained Ornstein-Uhlenbeck modes at the current time.
#[derive(Debug, Clone)]
pub struct OuModeSet {
    pub l: f64,
    pub n_max: usize,
    pub growth_rates: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub time: f64,
}

impl OuModeSet {
    pub fn new(l: f64, n_max: usize) -> Result<Self> {
        let p = KernelParams::new(l)?;
        if n_max == 0 {
            return domain("need at least one mode");
        }
        let growth_rates = (1..=n_max).map(|n| 1.0 - p.lambda(n)).collect();
        Ok(Self { l, n_max, growth_rates, coefficients: vec![0.0; n_max], time: 0.0 })
    }

    /// Exact transition over `dt`: `c ← e^{μ dt} c + N(0, v(dt))`, mode by mode.
    pub fn advance<R: Rng>(&mut self, dt: f64, rng: &mut R) {
        for (c, &mu) in self.coefficients.iter_mut().zip(&self.growth_rates) {
            let z: f64 = rng.sample(StandardNormal);
            *c = (mu * dt).exp() * *c + ou_variance(mu, dt).sqrt() * z;
        }
        self.time += dt;
    }

    /// `Σ_n c_n φ_n` at the nodes of a grid with `m` intervals on `[-L, L]`.
    pub fn synthesize(&self, m: usize, dst: &mut SineTransform) -> Field {
        let mut g = vec![0.0; m + 1];
        fold_signed(&self.coefficients, m, &mut g);
        dst.forward(&mut g);
        let s = 1.0 / self.l.sqrt();
        g.iter_mut().for_each(|v| *v *= s);
        let mut f = Field::zeros(self.l, m + 1);
        f.values = g;
        f.values[0] = 0.0;
        f.values[m] = 0.0;
        f.time = self.time;
        f
    }
}

/// Add coefficient `c[n-1]` of mode `n` onto its alias in `g[1..m]`.
fn fold_signed(c: &[f64], m: usize, g: &mut [f64]) {
    let period = 2 * m;
    for (i, &v) in c.iter().enumerate() {
        let r = (i + 1) % period;
        if r > 0 && r < m {
            g[r] += v;
        } else if r > m {
            g[period - r] -= v;
        }
    }
}

/// Exact sampler of `sqrt(eps) Z_eps(·, t)` on a uniform grid, reusable across seeds.
#[derive(Debug, Clone)]
pub struct SnapshotSampler {
    pub t: f64,
    pub l: f64,
    pub m: usize,
    pub n_modes: usize,
    sd: Vec<f64>,
    dst: SineTransform,
}

impl SnapshotSampler {
    /// Sampler for a grid with `m` intervals, meeting `tol_rel`.
    pub fn new(t: f64, m: usize, p: &KernelParams, tol_rel: f64) -> Result<Self> {
        if m < 2 {
            return domain("grid needs at least two intervals");
        }
        let n_modes = resolve_modes(required_modes(p.l, t, tol_rel)?, p)?;
        let mut var = vec![0.0; m + 1];
        let period = 2 * m;
        for n in 1..=n_modes {
            let r = n % period;
            let idx = if r > 0 && r < m {
                r
            } else if r > m {
                period - r
            } else {
                continue;
            };
            var[idx] += ou_variance(1.0 - p.lambda(n), t);
        }
        let sd = var.iter().map(|v| v.sqrt()).collect();
        Ok(Self { t, l: p.l, m, n_modes, sd, dst: SineTransform::new(m) })
    }

    /// Node variances of `Z_eps(·, t)` implied by the retained modes.
    pub fn node_variance(&self, i: usize) -> f64 {
        (1..self.m)
            .map(|k| {
                let s = (PI * (k * i) as f64 / self.m as f64).sin();
                self.sd[k] * self.sd[k] * s * s
            })
            .sum::<f64>()
            / self.l
    }

    pub fn sample(&mut self, eps: f64, seed: u64) -> Field {
        let mut rng = rng_from(seed);
        self.sample_with(eps, &mut rng)
    }

    pub fn sample_with<R: Rng>(&mut self, eps: f64, rng: &mut R) -> Field {
        let m = self.m;
        let mut g = vec![0.0; m + 1];
        for k in 1..m {
            let z: f64 = rng.sample(StandardNormal);
            g[k] = self.sd[k] * z;
        }
        self.dst.forward(&mut g);
        let s = (eps / self.l).sqrt();
        g.iter_mut().for_each(|v| *v *= s);
        g[0] = 0.0;
        g[m] = 0.0;
        Field { x_min: -self.l, dx: 2.0 * self.l / m as f64, values: g, time: self.t }
    }
}

/// One exact draw of `sqrt(eps) Z_eps(·, t)` on a grid with `m` intervals.
pub fn sample_z_snapshot(t: f64, m: usize, eps: f64, seed: u64, p: &KernelParams) -> Result<Field> {
    check_eps(eps)?;
    Ok(SnapshotSampler::new(t, m, p, SNAPSHOT_REL_TOL)?.sample(eps, seed))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return domain(format!("eps must lie in [0, 1), got {eps}"));
    }
    Ok(())
}

/// Exact path sampler of `sqrt(eps) Z_eps` at increasing times.
#[derive(Debug, Clone)]
pub struct PathSampler {
    pub t_points: Vec<f64>,
    pub m: usize,
    modes: OuModeSet,
    dst: SineTransform,
}

impl PathSampler {
    pub fn new(t_points: &[f64], m: usize, p: &KernelParams, tol_rel: f64) -> Result<Self> {
        if t_points.is_empty() || !(t_points[0] > 0.0) {
            return domain("time points must be nonempty and start after 0");
        }
        if t_points.windows(2).any(|w| !(w[1] >= w[0])) {
            return domain("time points must be non-decreasing");
        }
        let last = t_points[t_points.len() - 1];
        let n = resolve_modes(required_modes(p.l, last, tol_rel)?.max(m - 1), p)?;
        Ok(Self { t_points: t_points.to_vec(), m, modes: OuModeSet::new(p.l, n)?, dst: SineTransform::new(m) })
    }

    pub fn n_modes(&self) -> usize {
        self.modes.n_max
    }

    /// Run one path, handing each snapshot to `visit`.
    pub fn run<R: Rng>(&mut self, eps: f64, rng: &mut R, mut visit: impl FnMut(&Field)) {
        self.modes.coefficients.iter_mut().for_each(|c| *c = 0.0);
        self.modes.time = 0.0;
        let s = eps.sqrt();
        for k in 0..self.t_points.len() {
            let dt = self.t_points[k] - self.modes.time;
            self.modes.advance(dt, rng);
            self.modes.time = self.t_points[k];
            let mut f = self.modes.synthesize(self.m, &mut self.dst);
            f.values.iter_mut().for_each(|v| *v *= s);
            visit(&f);
        }
    }
}

/// Exact draw of `sqrt(eps) Z_eps` at each of `t_points` (shared path).
pub fn evolve_z_path(t_points: &[f64], m: usize, eps: f64, seed: u64, p: &KernelParams) -> Result<Vec<Field>> {
    check_eps(eps)?;
    if t_points.windows(2).any(|w| w[1] < w[0]) {
        return domain("time points must be non-decreasing");
    }
    let mut sampler = PathSampler::new(t_points, m, p, PATH_REL_TOL)?;
    let mut rng = rng_from(seed);
    let mut out = Vec::with_capacity(t_points.len());
    sampler.run(eps, &mut rng, |f| out.push(f.clone()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::covariance::cov_z_eps;

    #[test]
    fn ou_variance_series_branch_is_continuous() {
        let t = 2.0;
        let a = ou_variance(1e-9, t);
        let b = ou_variance(2e-8, t);
        assert!((a - t).abs() < 1e-7);
        assert!((b - (4e-8 * t).exp_m1() / 4e-8).abs() < 1e-12);
        assert_eq!(ou_variance(0.0, t), t);
    }

    #[test]
    fn tail_bound_dominates_direct_sum() {
        let l = 4.0;
        let p = KernelParams::new(l).unwrap();
        for n0 in [10usize, 100, 1000] {
            let direct: f64 = (n0 + 1..2_000_000).map(|n| ou_variance(1.0 - p.lambda(n), 50.0)).sum::<f64>() / l;
            assert!(direct <= tail_bound(l, n0));
            assert!(direct >= 0.5 * tail_bound(l, n0));
        }
        assert!(tail_bound(l, 1).is_infinite());
    }

    #[test]
    fn folded_variance_matches_quadrature() {
        let l = 6.0;
        let p = KernelParams::new(l).unwrap();
        let t = 5.0;
        let m = 16;
        let s = SnapshotSampler::new(t, m, &p, 1e-8).unwrap();
        for i in [1usize, 4, 8, 13] {
            let x = -l + i as f64 * 2.0 * l / m as f64;
            let want = cov_z_eps(x, x, t, t, &p).unwrap();
            assert!((s.node_variance(i) / want - 1.0).abs() < 1e-7, "node {i}");
        }
    }

    #[test]
    fn insufficient_modes_names_requirement() {
        let p = KernelParams::new(6.0).unwrap().with_truncation(1, 5).unwrap();
        match SnapshotSampler::new(2.0, 16, &p, 1e-8) {
            Err(Error::InsufficientModes { required, given }) => {
                assert_eq!(given, 5);
                assert!(required > 5);
            }
            other => panic!("expected InsufficientModes, got {other:?}"),
        }
    }

    #[test]
    fn snapshots_are_deterministic_and_dirichlet() {
        let p = KernelParams::new(5.0).unwrap();
        let a = sample_z_snapshot(1.5, 32, 1e-4, 9, &p).unwrap();
        let b = sample_z_snapshot(1.5, 32, 1e-4, 9, &p).unwrap();
        let c = sample_z_snapshot(1.5, 32, 1e-4, 10, &p).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.endpoints_zero());
    }

    #[test]
    fn path_repeats_on_zero_increment() {
        let p = KernelParams::new(5.0).unwrap();
        let path = evolve_z_path(&[0.5, 1.0, 1.0], 32, 1e-4, 3, &p).unwrap();
        assert_eq!(path[1].values, path[2].values);
        assert!(evolve_z_path(&[1.0, 0.5], 32, 1e-4, 3, &p).is_err());
        assert!(evolve_z_path(&[0.0, 0.5], 32, 1e-4, 3, &p).is_err());
    }

    #[test]
    fn modes_advance_exactly() {
        let mut ms = OuModeSet::new(3.0, 4).unwrap();
        ms.coefficients = vec![1.0, 2.0, 3.0, 4.0];
        let mut rng = rng_from(0);
        ms.advance(0.0, &mut rng);
        assert_eq!(ms.coefficients, vec![1.0, 2.0, 3.0, 4.0]);
    }
}
