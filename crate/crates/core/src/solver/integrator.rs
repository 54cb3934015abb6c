//! Exponential-Euler integrator in the Dirichlet sine basis.
//!
//! One step of length `h` maps `u` to
//! `e^{h(½Δ_h + 1)}(u - h φ(u)) + sqrt(eps) ∫ e^{(h-s)(½Δ_h + 1)} dW`, where
//! `Δ_h` is the second-difference Laplacian (sine eigenvalues
//! `-(4/dx²) sin²(kπ/(2M))`) and the stochastic integral is drawn with its exact
//! per-mode variance. The linear propagator has positive entries, so the
//! scheme preserves the pathwise order between drifts.

use crate::error::{domain, Error, Result};
use crate::gaussian::modes::ou_variance;
use crate::solver::config::{Drift, SolverConfig};
use crate::solver::dst::SineTransform;
use crate::solver::field::Field;
use crate::solver::noise::{NoiseDigest, NoisePanel};
use std::f64::consts::PI;

/// Linear propagator factors for one step length.
#[derive(Debug, Clone)]
struct Propagator {
    h: f64,
    decay: Vec<f64>,
    noise: Vec<f64>,
}

impl Propagator {
    fn new(lam: &[f64], h: f64) -> Self {
        let decay = lam.iter().map(|l| ((1.0 - l) * h).exp()).collect();
        let noise = lam.iter().map(|l| if h > 0.0 { (ou_variance(1.0 - l, h) / h).sqrt() } else { 0.0 }).collect();
        Self { h, decay, noise }
    }
}

/// Single-arm stepping machinery on a grid with `m` intervals.
#[derive(Debug, Clone)]
pub struct Stepper {
    m: usize,
    drift: Drift,
    lam: Vec<f64>,
    full: Propagator,
    dst: SineTransform,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl Stepper {
    pub fn new(m: usize, dx: f64, dt: f64, drift: Drift) -> Self {
        let lam: Vec<f64> = (0..=m).map(|k| 2.0 / (dx * dx) * (k as f64 * PI / (2.0 * m as f64)).sin().powi(2)).collect();
        let full = Propagator::new(&lam, dt);
        Self { m, drift, lam, full, dst: SineTransform::new(m), f: vec![0.0; m + 1], g: vec![0.0; m + 1] }
    }

    /// Discrete eigenvalue of `-½Δ_h` for sine mode `k`.
    pub fn lambda(&self, k: usize) -> f64 {
        self.lam[k]
    }

    /// Advance `u` by `h`; `noise` carries the physical-space increments and `sqrt(eps)`.
    pub fn advance(&mut self, u: &mut [f64], h: f64, noise: Option<(&[f64], f64)>) {
        let m = self.m;
        let partial;
        let prop = if h == self.full.h {
            &self.full
        } else {
            partial = Propagator::new(&self.lam, h);
            &partial
        };
        for i in 1..m {
            self.f[i] = u[i] - h * self.drift.phi(u[i]);
        }
        self.f[0] = 0.0;
        self.f[m] = 0.0;
        match noise {
            Some((xi, sigma)) => {
                self.g[1..m].copy_from_slice(&xi[1..m]);
                self.dst.forward_pair(&mut self.f, &mut self.g);
                for k in 1..m {
                    self.f[k] = prop.decay[k] * self.f[k] + sigma * prop.noise[k] * self.g[k];
                }
            }
            None => {
                self.dst.forward(&mut self.f);
                for k in 1..m {
                    self.f[k] *= prop.decay[k];
                }
            }
        }
        self.dst.forward(&mut self.f);
        let s = 2.0 / m as f64;
        u[0] = 0.0;
        u[m] = 0.0;
        for i in 1..m {
            u[i] = s * self.f[i];
        }
    }
}

/// Outcome of a multi-arm run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// `snapshots[arm][j]` at snapshot time `j`.
    pub snapshots: Vec<Vec<Field>>,
    pub digests: Vec<NoiseDigest>,
    pub steps: u64,
}

fn check_inputs(inits: &[&Field], t_end: f64, eps: f64, cfg: &SolverConfig, panel: Option<&NoisePanel>) -> Result<usize> {
    cfg.validate()?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return domain(format!("horizon must be finite and nonnegative, got {t_end}"));
    }
    if !(0.0..1.0).contains(&eps) {
        return domain(format!("eps must lie in [0, 1), got {eps}"));
    }
    let first = inits.first().ok_or_else(|| Error::Domain("no initial fields".into()))?;
    let n = first.n_points();
    if n < 3 || n % 2 == 0 {
        return Err(Error::Config(format!("grid must have an odd number >= 3 of nodes, got {n}")));
    }
    for f in inits {
        f.check_dirichlet()?;
        if f.n_points() != n || f.dx != first.dx {
            return domain("all arms must share one grid");
        }
    }
    if ((first.dx - cfg.dx) / cfg.dx).abs() > 1e-9 {
        return Err(Error::Config(format!("field spacing {} differs from configured dx {}", first.dx, cfg.dx)));
    }
    if cfg.snapshot_times.iter().any(|&s| s > t_end * (1.0 + 1e-12) + 1e-12) {
        return Err(Error::Config(format!("snapshot time beyond the horizon {t_end}")));
    }
    if eps > 0.0 {
        let p = panel.ok_or_else(|| Error::Config("a noise panel is required when eps > 0".into()))?;
        if p.cells != n - 2 || p.dt != cfg.dt || ((p.dx - first.dx) / first.dx).abs() > 1e-12 {
            return Err(Error::Config("noise panel does not match the grid and time step".into()));
        }
    }
    Ok(n - 1)
}

/// Integrate several drift variants in lockstep with one shared noise panel.
///
/// `observe(step, time, states)` is called after every full step.
pub fn run_arms(
    inits: &[&Field],
    drifts: &[Drift],
    t_end: f64,
    eps: f64,
    cfg: &SolverConfig,
    panel: Option<&NoisePanel>,
    mut observe: impl FnMut(u64, f64, &[Vec<f64>]),
) -> Result<RunOutput> {
    let m = check_inputs(inits, t_end, eps, cfg, panel)?;
    if inits.len() != drifts.len() {
        return domain("one initial field per drift is required");
    }
    let dt = cfg.dt;
    let dx = inits[0].dx;
    let x_min = inits[0].x_min;
    let noisy = eps > 0.0;
    let sigma = eps.sqrt();
    let n_arms = drifts.len();
    let mut steppers: Vec<Stepper> = drifts.iter().map(|&d| Stepper::new(m, dx, dt, d)).collect();
    let mut states: Vec<Vec<f64>> = inits.iter().map(|f| f.values.clone()).collect();
    let mut digests = vec![NoiseDigest::default(); n_arms];
    let snaps: Vec<f64> = if cfg.snapshot_times.is_empty() { vec![t_end] } else { cfg.snapshot_times.clone() };
    let mut out: Vec<Vec<Field>> = vec![Vec::with_capacity(snaps.len()); n_arms];
    let mut xi = vec![0.0; m + 1];
    let mut xb = vec![0.0; m + 1];
    let mut tmp = vec![0.0; m + 1];
    let tol = 1e-9 * dt;
    let n_full = ((t_end / dt) + 1e-9).floor() as u64;
    let mut next = 0usize;
    let t0_field = inits[0].time;

    let take = |k: u64,
                t0: f64,
                upto: f64,
                states: &[Vec<f64>],
                steppers: &mut [Stepper],
                xi: &[f64],
                xb: &mut [f64],
                tmp: &mut [f64],
                next: &mut usize,
                out: &mut [Vec<Field>]| {
        while *next < snaps.len() && snaps[*next] < upto {
            let h = (snaps[*next] - t0).max(0.0);
            if noisy && h > tol {
                panel.expect("checked").bridge(k, h, xi, xb);
            }
            for a in 0..n_arms {
                tmp.copy_from_slice(&states[a]);
                if h > tol {
                    let noise = if noisy { Some((&xb[..], sigma)) } else { None };
                    steppers[a].advance(tmp, h, noise);
                }
                out[a].push(Field { x_min, dx, values: tmp.to_vec(), time: t0_field + snaps[*next] });
            }
            *next += 1;
        }
    };

    for k in 0..n_full {
        let t0 = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;
        if noisy {
            panel.expect("checked").increments(k, &mut xi);
        }
        take(k, t0, t1 - tol, &states, &mut steppers, &xi, &mut xb, &mut tmp, &mut next, &mut out);
        for a in 0..n_arms {
            let noise = if noisy {
                digests[a].absorb(&xi[1..m]);
                Some((&xi[..], sigma))
            } else {
                None
            };
            steppers[a].advance(&mut states[a], dt, noise);
            if states[a].iter().any(|v| !v.is_finite()) {
                return Err(Error::Blowup { step: k + 1, time: t1 });
            }
        }
        observe(k + 1, t1, &states);
    }
    if next < snaps.len() {
        let t0 = n_full as f64 * dt;
        if noisy {
            panel.expect("checked").increments(n_full, &mut xi);
        }
        take(n_full, t0, f64::INFINITY, &states, &mut steppers, &xi, &mut xb, &mut tmp, &mut next, &mut out);
        for arm in &out {
            if arm.last().is_some_and(|f| f.values.iter().any(|v| !v.is_finite())) {
                return Err(Error::Blowup { step: n_full + 1, time: t_end });
            }
        }
    }
    Ok(RunOutput { snapshots: out, digests, steps: n_full })
}

/// Stochastic Allen-Cahn run with drift `cfg.drift`; returns the snapshots.
pub fn run_stochastic(init: &Field, t_end: f64, eps: f64, cfg: &SolverConfig, panel: &NoisePanel) -> Result<Vec<Field>> {
    let out = run_arms(&[init], &[cfg.drift], t_end, eps, cfg, Some(panel), |_, _, _| {})?;
    Ok(out.snapshots.into_iter().next().expect("one arm"))
}

/// Deterministic run (`eps = 0`).
pub fn run_deterministic(init: &Field, t_end: f64, cfg: &SolverConfig) -> Result<Vec<Field>> {
    let out = run_arms(&[init], &[cfg.drift], t_end, 0.0, cfg, None, |_, _, _| {})?;
    Ok(out.snapshots.into_iter().next().expect("one arm"))
}

/// Ordering check tolerance for the comparison runs.
pub const COMPARISON_TOL: f64 = 1e-9;

/// Lower (`phi1`), middle (`full`), upper (`phi2`) and linear arms on one panel.
#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub lower: Vec<Field>,
    pub middle: Vec<Field>,
    pub upper: Vec<Field>,
    pub linear: Vec<Field>,
    /// Node-steps with `lower > middle` or `middle > upper` beyond tolerance.
    pub violations: u64,
    /// Node-steps with `lower > linear` or `linear > upper` beyond tolerance.
    pub linear_violations: u64,
    pub max_excess: f64,
    pub digests: Vec<NoiseDigest>,
}

pub fn run_comparison_triple(init: &Field, t_end: f64, eps: f64, cfg: &SolverConfig, panel: &NoisePanel) -> Result<ComparisonRun> {
    let mut violations = 0u64;
    let mut linear_violations = 0u64;
    let mut max_excess: f64 = 0.0;
    let mut check = |s: &[Vec<f64>]| {
        let (lo, mid, up, lin) = (&s[0], &s[1], &s[2], &s[3]);
        for i in 0..lo.len() {
            let e1 = (lo[i] - mid[i]).max(mid[i] - up[i]);
            let e2 = (lo[i] - lin[i]).max(lin[i] - up[i]);
            max_excess = max_excess.max(e1).max(e2);
            violations += (e1 > COMPARISON_TOL) as u64;
            linear_violations += (e2 > COMPARISON_TOL) as u64;
        }
    };
    let out = run_arms(
        &[init, init, init, init],
        &[Drift::Phi1, Drift::Full, Drift::Phi2, Drift::Linear],
        t_end,
        eps,
        cfg,
        Some(panel),
        |_, _, s| check(s),
    )?;
    let mut snaps = out.snapshots.into_iter();
    let lower = snaps.next().expect("arm");
    let middle = snaps.next().expect("arm");
    let upper = snaps.next().expect("arm");
    let linear = snaps.next().expect("arm");
    for j in 0..lower.len() {
        check(&[lower[j].values.clone(), middle[j].values.clone(), upper[j].values.clone(), linear[j].values.clone()]);
    }
    Ok(ComparisonRun { lower, middle, upper, linear, violations, linear_violations, max_excess, digests: out.digests })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::field::plateau;
    use crate::solver::ode::ode_w;

    fn setup(l: f64, dx: f64, dt_cap: f64) -> (SolverConfig, usize) {
        let cfg = SolverConfig::for_length(l, dx, dt_cap, Drift::Full, 0);
        let n = cfg.n_points(l);
        (cfg, n)
    }

    #[test]
    fn zero_is_stationary() {
        let (cfg, n) = setup(5.0, 0.1, 0.01);
        let init = Field::zeros(5.0, n);
        let out = run_deterministic(&init, 2.0, &cfg).unwrap();
        assert!(out[0].values.iter().all(|&v| v == 0.0));
        let panel = NoisePanel::new(1, n - 2, cfg.dt, cfg.dx);
        let out = run_stochastic(&init, 2.0, 0.0, &cfg, &panel).unwrap();
        assert!(out[0].values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn first_eigenfunction_grows_at_discrete_rate() {
        let l = 5.0;
        let (cfg, n) = setup(l, 0.02, 0.01);
        let cfg = cfg.with_drift(Drift::Linear);
        let init = Field::dirichlet_from_fn(l, n, |x| (PI * (x + l) / (2.0 * l)).sin());
        let out = run_deterministic(&init, 1.0, &cfg).unwrap();
        let st = Stepper::new(n - 1, cfg.dx, cfg.dt, Drift::Linear);
        let g = (1.0 - st.lambda(1)).exp();
        let mid = n / 2;
        assert!((out[0].values[mid] / (g * init.values[mid]) - 1.0).abs() < 1e-12);
        // Continuum rate agrees to O(dx²).
        let gc = (1.0 - PI * PI / (8.0 * l * l)).exp();
        assert!((out[0].values[mid] / (gc * init.values[mid]) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn plateau_follows_ode() {
        let l = 13.8;
        let (cfg, n) = setup(l, 0.1, 0.01);
        let init = plateau(l, n, 0.3, 1.0);
        let cfg = cfg.with_snapshots(vec![1.0, 2.0, 3.0]);
        let out = run_deterministic(&init, 3.0, &cfg).unwrap();
        for f in &out {
            let w = ode_w(f.time, 0.3).unwrap();
            assert!((f.values[n / 2] - w).abs() < 1e-2, "t = {}", f.time);
            assert!(f.endpoints_zero());
        }
    }

    #[test]
    fn snapshots_do_not_perturb_the_path() {
        let l = 4.0;
        let (cfg, n) = setup(l, 0.1, 0.01);
        let panel = NoisePanel::new(3, n - 2, cfg.dt, cfg.dx);
        let init = Field::zeros(l, n);
        let a = run_stochastic(&init, 1.0, 1e-3, &cfg, &panel).unwrap();
        let b = run_stochastic(&init, 1.0, 1e-3, &cfg.clone().with_snapshots(vec![0.123, 0.5, 1.0]), &panel).unwrap();
        assert_eq!(a[0].values, b[2].values);
        assert!((b[0].time - 0.123).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_configuration() {
        let l = 4.0;
        let (cfg, n) = setup(l, 0.1, 0.01);
        let init = Field::zeros(l, n);
        let wrong = NoisePanel::new(3, n, cfg.dt, cfg.dx);
        assert!(matches!(run_stochastic(&init, 1.0, 1e-3, &cfg, &wrong), Err(Error::Config(_))));
        let mut big_dt = cfg.clone();
        big_dt.dt = 1.0;
        assert!(matches!(run_deterministic(&init, 1.0, &big_dt), Err(Error::Config(_))));
        let mut nonzero = init.clone();
        nonzero.values[0] = 1.0;
        assert!(run_deterministic(&nonzero, 1.0, &cfg).is_err());
    }

    #[test]
    fn blowup_names_the_step() {
        let l = 2.0;
        let (cfg, n) = setup(l, 0.1, 0.01);
        let init = plateau(l, n, 200.0, 0.3);
        match run_deterministic(&init, 1.0, &cfg) {
            Err(Error::Blowup { step, .. }) => assert!(step >= 1),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn comparison_ordering_holds() {
        let l = 6.0;
        let (cfg, n) = setup(l, 0.1, 0.01);
        let panel = NoisePanel::new(11, n - 2, cfg.dt, cfg.dx);
        let init = Field::zeros(l, n);
        let run = run_comparison_triple(&init, 3.0, 1e-2, &cfg, &panel).unwrap();
        assert_eq!(run.violations, 0);
        assert_eq!(run.linear_violations, 0);
        assert!(run.digests.windows(2).all(|d| d[0] == d[1]));
    }
}
