//! Stage II coupling: after `T_hat` the stochastic solution follows the
//! deterministic flow started from `u(·, T_hat)` restricted to `[-K_eps, K_eps]`.

use super::stats::{two_proportion_z, wilson};
use super::summary::{EnsembleSummary, Statistic, Table};
use super::{run_replicas, Context};
use crate::error::{domain, Result};
use crate::scaling::{make_schedule, ScalingSchedule};
use crate::solver::{run_arms, run_deterministic, Drift, Field, NoisePanel, SolverConfig};

/// Clamp levels compared by default.
pub const M_LEVELS: [f64; 2] = [2.0, 10.0];

/// How `φ` is continued outside `[-K_eps, K_eps]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extension {
    /// No change: `φ = u(·, T_hat)` everywhere, which isolates the noise.
    Identity,
    /// The constants `u(±K_eps)`.
    Clamp,
    /// `-M sgn u(±K_eps)`: the largest admissible push towards the other phase.
    Adverse(f64),
}

/// `φ = u` on `[-K, K]`, continued by `ext`, zero at `±L`.
pub fn restart_field(u: &Field, k_eps: f64, ext: Extension) -> Field {
    let n = u.n_points();
    let left = u.values[u.nearest(-k_eps)];
    let right = u.values[u.nearest(k_eps)];
    let mut phi = u.clone();
    phi.time = 0.0;
    for i in 1..n - 1 {
        let x = u.x(i);
        if x.abs() > k_eps {
            let edge = if x < 0.0 { left } else { right };
            phi.values[i] = match ext {
                Extension::Identity => u.values[i],
                Extension::Clamp => edge,
                Extension::Adverse(m) => -m * edge.signum(),
            };
        }
    }
    phi.values[0] = 0.0;
    phi.values[n - 1] = 0.0;
    phi
}

/// Sup distances on `|x| <= q K_eps` between `u(·, T^b)` and `v(·, τ̂^b; φ)` for
/// the clamp extension, each adverse level and the identity extension, given
/// `u(·, T_hat)`.
///
/// The drift is explicit, so runs from level `M` use `dt <= 1/(6 M²)`.
pub fn coupling_distances(
    u_hat: &Field,
    u_b: &Field,
    sched: &ScalingSchedule,
    q: f64,
    levels: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let det = cfg.clone().with_drift(Drift::Full).with_snapshots(vec![]);
    let radius = q * sched.k_eps;
    let mut out = Vec::with_capacity(levels.len() + 2);
    let exts =
        std::iter::once(Extension::Clamp).chain(levels.iter().map(|&m| Extension::Adverse(m))).chain(std::iter::once(Extension::Identity));
    for ext in exts {
        let phi = restart_field(u_hat, sched.k_eps, ext);
        let mut c = det.clone();
        if let Extension::Adverse(m) = ext {
            c.dt = c.dt.min(1.0 / (6.0 * m * m));
        }
        let v = run_deterministic(&phi, sched.tau_hat_b, &c)?.pop().expect("final snapshot");
        out.push(u_b.sup_diff_within(&v, radius));
    }
    Ok(out)
}

/// Frequency of `sup_{|x| <= q K_eps} |u(x, T^b) - v(x, τ̂^b; φ)| >= δ`.
#[allow(clippy::too_many_arguments)]
pub fn exp_stage2_coupling(
    eps: f64,
    b: f64,
    levels: &[f64],
    delta: f64,
    q: f64,
    k: f64,
    n_replicas: usize,
    ctx: &Context,
) -> Result<EnsembleSummary> {
    let th = &ctx.thresholds;
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("q must lie in (0, 1), got {q}"));
    }
    if !(delta > 0.0) {
        return domain(format!("delta must be positive, got {delta}"));
    }
    if levels.iter().any(|&m| !(m >= 1.0)) {
        return domain("clamp levels M must be at least 1");
    }
    let sched = make_schedule(eps, b, k)?;
    let l = sched.l_eps;
    let cfg = ctx.solver_config(l)?.with_snapshots(vec![sched.t_hat, sched.t_b]);
    let n = cfg.n_points(l);
    let reps = run_replicas(
        "stage2_coupling",
        ctx.master_seed,
        n_replicas,
        ctx.threads,
        || (),
        |_, _, seed| {
            let zero = Field::zeros(l, n);
            let panel = NoisePanel::new(seed, n - 2, cfg.dt, zero.dx);
            let run = run_arms(&[&zero], &[Drift::Full], sched.t_b, eps, &cfg, Some(&panel), |_, _, _| {})?;
            let s = &run.snapshots[0];
            coupling_distances(&s[0], &s[1], &sched, q, levels, &cfg)
        },
    )?;

    let mut out = EnsembleSummary::new("stage2_coupling", Some(sched), n_replicas);
    out.param("delta", delta);
    out.param("q", q);
    out.param("levels", levels.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" "));
    out.param("dx", cfg.dx);
    out.param("dt", cfg.dt);
    out.threshold("coupling_freq", th.coupling_freq);
    out.threshold("coupling_m_z", th.coupling_m_z);
    let counts: Vec<usize> = (0..levels.len() + 2).map(|j| reps.iter().filter(|r| r[j] >= delta).count()).collect();
    let names = std::iter::once("clamp".to_string())
        .chain(levels.iter().map(|m| format!("adverse_m_{m}")))
        .chain(std::iter::once("identity".to_string()));
    for (j, name) in names.enumerate() {
        let f = counts[j] as f64 / n_replicas.max(1) as f64;
        let (lo, hi) = wilson(counts[j], n_replicas, th.wilson_z);
        let s = Statistic::report(format!("freq_sup_ge_delta_{name}"), f).with_interval(lo, hi);
        out.push(if j == 0 { s.judged(th.coupling_freq, f <= th.coupling_freq) } else { s.against(th.coupling_freq) });
        let mut v: Vec<f64> = reps.iter().map(|r| r[j]).collect();
        v.sort_by(f64::total_cmp);
        out.push(Statistic::report(format!("median_sup_{name}"), v[v.len() / 2]));
    }
    if levels.len() >= 2 {
        let (a, z_last) = (counts[1], counts[levels.len()]);
        let z = two_proportion_z(a, n_replicas, z_last, n_replicas);
        out.push(Statistic::report("level_z_first_vs_last", z).judged(th.coupling_m_z, z.abs() <= th.coupling_m_z));
    }
    let mut table = Table::new("replicas", &["replica", "clamp"]);
    table.columns.extend(levels.iter().map(|m| format!("adverse_m_{m}")));
    table.columns.push("identity".into());
    for (i, r) in reps.iter().enumerate() {
        let mut row = vec![i as f64];
        row.extend(r);
        table.push(row);
    }
    out.tables.push(table);
    out.note("clamp: phi = u(T_hat) on [-K_eps, K_eps], constant u(±K_eps) beyond; adverse M: -M sgn u(±K_eps) beyond");
    out.note("identity: phi = u(T_hat) on all of [-L, L]; its frequency is the part due to the noise alone");
    Ok(out.finalize(true, th.min_replicas))
}
