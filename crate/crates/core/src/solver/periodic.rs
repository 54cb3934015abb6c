//! Periodic surrogates for the whole-line deterministic equation.

use crate::error::{domain, Error, Result};
use crate::solver::config::SolverConfig;
use crate::solver::dst::PeriodicTransform;
use crate::solver::field::{Field, PeriodicField};
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

/// Odd reflection about `x = L`, then `4L`-periodization. The result lives on
/// `[-L, 3L)` and agrees with `phi` on `[-L, L]`.
pub fn reflect_extend(phi: &Field) -> Result<PeriodicField> {
    if !phi.endpoints_zero() {
        return domain("odd reflection needs a field vanishing at both endpoints");
    }
    let m = phi.intervals();
    let values = (0..2 * m).map(|j| if j <= m { phi.values[j] } else { -phi.values[2 * m - j] }).collect();
    Ok(PeriodicField { x_min: phi.x_min, dx: phi.dx, values, time: phi.time })
}

/// `phi` on `[-K, K]`, continued by the constants `phi(±K)` beyond, sampled on
/// `[-2L, 2L)` with the spacing of `phi`.
pub fn clamp_extend(phi: &Field, k: f64) -> Result<PeriodicField> {
    let l = phi.half_length();
    if !(k > 0.0 && k < l) {
        return domain(format!("clamp radius {k} must lie in (0, L = {l})"));
    }
    let m = phi.intervals();
    let at = |x: f64| {
        let s = ((x - phi.x_min) / phi.dx).clamp(0.0, m as f64);
        let i = (s.floor() as usize).min(m - 1);
        let w = s - i as f64;
        (1.0 - w) * phi.values[i] + w * phi.values[i + 1]
    };
    let values = (0..2 * m)
        .map(|j| {
            let x = -2.0 * l + j as f64 * phi.dx;
            at(x.clamp(-k, k))
        })
        .collect();
    Ok(PeriodicField { x_min: -2.0 * l, dx: phi.dx, values, time: phi.time })
}

fn step(u: &mut [f64], buf: &mut [Complex64], fft: &mut PeriodicTransform, cfg: &SolverConfig, decay: &[f64], h: f64) {
    for (b, &v) in buf.iter_mut().zip(u.iter()) {
        *b = Complex64::new(v - h * cfg.drift.phi(v), 0.0);
    }
    fft.forward(buf);
    for (b, d) in buf.iter_mut().zip(decay) {
        *b *= d;
    }
    fft.inverse(buf);
    for (v, b) in u.iter_mut().zip(buf.iter()) {
        *v = b.re;
    }
}

fn decay_factors(n: usize, dx: f64, h: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let lam = 2.0 / (dx * dx) * (PI * k as f64 / n as f64).sin().powi(2);
            ((1.0 - lam) * h).exp()
        })
        .collect()
}

/// Deterministic periodic run with drift `cfg.drift`; snapshots at `cfg.snapshot_times`
/// (or at `t_end` if none are given).
pub fn run_periodic(init: &PeriodicField, t_end: f64, cfg: &SolverConfig) -> Result<Vec<PeriodicField>> {
    cfg.validate()?;
    if ((init.dx - cfg.dx) / cfg.dx).abs() > 1e-9 {
        return Err(Error::Config(format!("field spacing {} differs from configured dx {}", init.dx, cfg.dx)));
    }
    let n = init.values.len();
    if n < 2 {
        return domain("periodic field needs at least two nodes");
    }
    let dt = cfg.dt;
    let mut fft = PeriodicTransform::new(n);
    let full = decay_factors(n, init.dx, dt);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut u = init.values.clone();
    let snaps: Vec<f64> = if cfg.snapshot_times.is_empty() { vec![t_end] } else { cfg.snapshot_times.clone() };
    let mut out = Vec::with_capacity(snaps.len());
    let tol = 1e-9 * dt;
    let n_full = ((t_end / dt) + 1e-9).floor() as u64;
    let mut next = 0;
    let record = |u: &[f64],
                  t0: f64,
                  upto: f64,
                  next: &mut usize,
                  out: &mut Vec<PeriodicField>,
                  fft: &mut PeriodicTransform,
                  buf: &mut [Complex64]| {
        while *next < snaps.len() && snaps[*next] < upto {
            let h = (snaps[*next] - t0).max(0.0);
            let mut v = u.to_vec();
            if h > tol {
                step(&mut v, buf, fft, cfg, &decay_factors(n, init.dx, h), h);
            }
            out.push(PeriodicField { x_min: init.x_min, dx: init.dx, values: v, time: init.time + snaps[*next] });
            *next += 1;
        }
    };
    for k in 0..n_full {
        let t0 = k as f64 * dt;
        record(&u, t0, t0 + dt - tol, &mut next, &mut out, &mut fft, &mut buf);
        step(&mut u, &mut buf, &mut fft, cfg, &full, dt);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { step: k + 1, time: t0 + dt });
        }
    }
    record(&u, n_full as f64 * dt, f64::INFINITY, &mut next, &mut out, &mut fft, &mut buf);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::config::Drift;
    use crate::solver::integrator::run_deterministic;
    use crate::solver::ode::ode_w;

    #[test]
    fn reflection_is_odd_and_restricts() {
        let l = 3.0;
        let phi = Field::dirichlet_from_fn(l, 61, |x| (x + 0.3).sin() * (l * l - x * x));
        let e = reflect_extend(&phi).unwrap();
        assert_eq!(e.restrict(61).values, phi.values);
        let m = 60;
        for j in 0..=m {
            // extension(2L - x) = -phi(x)
            let mirror = 2 * m - j;
            let v = if mirror == 2 * m { e.values[0] } else { e.values[mirror] };
            assert_eq!(v, -phi.values[j]);
        }
        let z = reflect_extend(&Field::zeros(l, 61)).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        let mut bad = phi.clone();
        bad.values[0] = 1.0;
        assert!(reflect_extend(&bad).is_err());
    }

    #[test]
    fn eigenfunction_extends_to_itself() {
        let l = 3.0;
        let f = |x: f64| (PI * (x + l) / (2.0 * l)).sin();
        let phi = Field::dirichlet_from_fn(l, 61, f);
        let e = reflect_extend(&phi).unwrap();
        for j in 0..e.values.len() {
            assert!((e.values[j] - f(e.x(j))).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_follows_ode() {
        let cfg = SolverConfig::for_length(4.0, 0.1, 0.001, Drift::Full, 0);
        let init = PeriodicField { x_min: -4.0, dx: cfg.dx, values: vec![0.4; 80], time: 0.0 };
        let out = run_periodic(&init, 1.0, &cfg).unwrap();
        let w = ode_w(1.0, 0.4).unwrap();
        assert!(out[0].values.iter().all(|v| (v - w).abs() < 1e-3));
    }

    #[test]
    fn reflected_run_equals_dirichlet_run() {
        let l = 5.0;
        let cfg = SolverConfig::for_length(l, 0.1, 0.01, Drift::Full, 0).with_snapshots(vec![0.5, 1.7]);
        let n = cfg.n_points(l);
        let phi = Field::dirichlet_from_fn(l, n, |x| 0.6 * (x * 1.3).sin() * ((l - x.abs()) / 0.7).tanh());
        let d = run_deterministic(&phi, 1.7, &cfg).unwrap();
        let p = run_periodic(&reflect_extend(&phi).unwrap(), 1.7, &cfg).unwrap();
        for (a, b) in d.iter().zip(&p) {
            let r = b.restrict(n);
            assert!(a.sup_diff_within(&r, l) < 1e-12);
        }
    }

    #[test]
    fn clamp_extension_values() {
        let l = 4.0;
        let phi = Field::dirichlet_from_fn(l, 81, |x| x / l);
        let psi = clamp_extend(&phi, 2.0).unwrap();
        assert_eq!(psi.values.len(), 160);
        assert!((psi.values[0] + 0.5).abs() < 1e-12);
        assert!((psi.values[159] - 0.5).abs() < 1e-12);
        let j0 = 80; // x = 0
        assert!(psi.values[j0].abs() < 1e-12);
        assert!(clamp_extend(&phi, 5.0).is_err());
    }
}
