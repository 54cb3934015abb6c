//! Stage I: from `u = 0` to `T_hat`, the solution stays close to the linear
//! field `sqrt(eps) Z_eps`, so it inherits the sign of `Y_eps` on the excursion set.

use super::stats::wilson;
use super::summary::{EnsembleSummary, Statistic, Table};
use super::{run_replicas, Context};
use crate::error::Result;
use crate::scaling::{make_schedule, to_r_grid, ScalingSchedule};
use crate::solver::{run_arms, Drift, Field, NoisePanel, SolverConfig};

/// Spacing of the r-grid used for excursion sets.
pub const R_SPACING: f64 = 0.05;

/// Per-replica outcome of the coupled `u` / `sqrt(eps) Z` run to `T_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Replica {
    /// `‖u‖` over `[0, T_hat/2]`.
    pub sup_u_half: f64,
    /// `‖sqrt(eps) Z‖` over `[0, T_hat/2]`.
    pub sup_z_half: f64,
    /// `‖u - sqrt(eps) Z‖` over `[0, T_hat]`.
    pub sup_diff: f64,
    /// Steps at which `‖u - sqrt(eps) Z‖_t > e^t ‖sqrt(eps) Z‖_t³` beyond the slack.
    pub cubic_violations: u64,
    /// Largest `‖u - sqrt(eps) Z‖_t / (e^t ‖sqrt(eps) Z‖_t³)`.
    pub cubic_ratio: f64,
    /// `u(·, T_hat)` and `sqrt(eps) Z(·, T_hat)` on the r-grid.
    pub u_r: Vec<f64>,
    pub y_r: Vec<f64>,
    pub digests_equal: bool,
}

/// Run `u` (full drift) and `sqrt(eps) Z` (linear drift) from zero on one panel.
pub fn stage1_replica(sched: &ScalingSchedule, cfg: &SolverConfig, seed: u64, cubic_rel_tol: f64) -> Result<Stage1Replica> {
    let l = sched.l_eps;
    let n = cfg.n_points(l);
    let zero = Field::zeros(l, n);
    let panel = NoisePanel::new(seed, n - 2, cfg.dt, zero.dx);
    let half = 0.5 * sched.t_hat;
    let mut sup_u_half: f64 = 0.0;
    let mut sup_z_half: f64 = 0.0;
    let mut sup_diff: f64 = 0.0;
    let mut sup_z: f64 = 0.0;
    let mut cubic_violations = 0u64;
    let mut cubic_ratio: f64 = 0.0;
    let cfg = cfg.clone().with_snapshots(vec![sched.t_hat]);
    let out = run_arms(&[&zero, &zero], &[Drift::Full, Drift::Linear], sched.t_hat, sched.eps, &cfg, Some(&panel), |_, t, s| {
        let (u, z) = (&s[0], &s[1]);
        let mut du: f64 = 0.0;
        let mut dz: f64 = 0.0;
        let mut dd: f64 = 0.0;
        for i in 0..u.len() {
            du = du.max(u[i].abs());
            dz = dz.max(z[i].abs());
            dd = dd.max((u[i] - z[i]).abs());
        }
        if t <= half * (1.0 + 1e-12) {
            sup_u_half = sup_u_half.max(du);
            sup_z_half = sup_z_half.max(dz);
        }
        sup_diff = sup_diff.max(dd);
        sup_z = sup_z.max(dz);
        let bound = t.exp() * sup_z.powi(3);
        if bound > 0.0 {
            cubic_ratio = cubic_ratio.max(sup_diff / bound);
        }
        if sup_diff > bound * (1.0 + cubic_rel_tol) + 1e-300 {
            cubic_violations += 1;
        }
    })?;
    let u = &out.snapshots[0][0];
    let z = &out.snapshots[1][0];
    Ok(Stage1Replica {
        sup_u_half,
        sup_z_half,
        sup_diff,
        cubic_violations,
        cubic_ratio,
        u_r: to_r_grid(u, sched, R_SPACING)?.values,
        y_r: to_r_grid(z, sched, R_SPACING)?.values,
        digests_equal: out.digests[0] == out.digests[1],
    })
}

/// Outcome of the excursion event: `None` when the excursion set is empty.
pub fn excursion_event(rep: &Stage1Replica, level: f64, target: f64) -> Option<bool> {
    let mut inf = f64::INFINITY;
    for (y, u) in rep.y_r.iter().zip(&rep.u_r) {
        if y.abs() > level {
            inf = inf.min(u.abs());
        }
    }
    if inf.is_finite() {
        Some(inf > target)
    } else {
        None
    }
}

fn frequency_stat(name: &str, k: usize, n: usize, z: f64) -> Statistic {
    let (lo, hi) = wilson(k, n, z);
    let f = if n == 0 { f64::NAN } else { k as f64 / n as f64 };
    Statistic::report(name, f).with_interval(lo, hi)
}

/// Frequency of `inf_{excursion set} |u(r sqrt|ln eps|, T_hat)| > ϑ / (2|ln eps|^{1/4})`.
pub fn exp_stage1(eps: f64, theta: f64, k: f64, n_replicas: usize, ctx: &Context) -> Result<EnsembleSummary> {
    let th = &ctx.thresholds;
    let sched = make_schedule(eps, 1.0, k)?;
    let cfg = ctx.solver_config(sched.l_eps)?;
    let reps = run_replicas(
        "stage1",
        ctx.master_seed,
        n_replicas,
        ctx.threads,
        || (),
        |_, _, seed| stage1_replica(&sched, &cfg, seed, th.cubic_rel_tol),
    )?;
    let level = sched.excursion_level(theta);
    let target = 0.5 * level;
    let events: Vec<Option<bool>> = reps.iter().map(|r| excursion_event(r, level, target)).collect();
    let hits = events.iter().filter(|e| e.unwrap_or(true)).count();
    let vacuous = events.iter().filter(|e| e.is_none()).count();
    let nonvac = n_replicas - vacuous;
    let hits_nonvac = events.iter().filter(|e| **e == Some(true)).count();

    let mut out = EnsembleSummary::new("stage1", Some(sched), n_replicas);
    out.param("theta", theta);
    out.param("dx", cfg.dx);
    out.param("dt", cfg.dt);
    out.threshold("stage1_freq", th.stage1_freq);
    out.threshold("stage1_pass_max_eps", th.stage1_pass_max_eps);
    let freq = frequency_stat("event_frequency", hits, n_replicas, th.wilson_z);
    let f = freq.value;
    out.push(if eps <= th.stage1_pass_max_eps { freq.judged(th.stage1_freq, f >= th.stage1_freq) } else { freq.against(th.stage1_freq) });
    out.push(frequency_stat("event_frequency_nonvacuous", hits_nonvac, nonvac, th.wilson_z));
    out.push(Statistic::report("vacuous_fraction", vacuous as f64 / n_replicas.max(1) as f64));
    out.push(Statistic::report("excursion_level", level));
    let all_equal = reps.iter().all(|r| r.digests_equal);
    out.push(Statistic::report("panel_digests_equal", all_equal as u8 as f64).judged(1.0, all_equal));
    if eps > th.stage1_pass_max_eps {
        out.note("eps above the pass cut-off: frequency reported only");
    }
    out.note("an empty excursion set makes the event vacuously true; vacuous replicas count as successes in event_frequency");

    let mut table = Table::new("replicas", &["replica", "event", "vacuous", "min_abs_u_on_set"]);
    for (i, (r, e)) in reps.iter().zip(&events).enumerate() {
        let m = r.y_r.iter().zip(&r.u_r).filter(|(y, _)| y.abs() > level).map(|(_, u)| u.abs()).fold(f64::INFINITY, f64::min);
        table.push(vec![i as f64, e.unwrap_or(true) as u8 as f64, e.is_none() as u8 as f64, if m.is_finite() { m } else { -1.0 }]);
    }
    out.tables.push(table);
    Ok(out.finalize(true, th.min_replicas))
}

/// `25 (ln|ln eps|)^6 / |ln eps|^{3/4}`.
pub fn umz_bound(sched: &ScalingSchedule) -> f64 {
    25.0 * sched.abs_log_eps.ln().powi(6) / sched.abs_log_eps.powf(0.75)
}

/// `2 eps^{1/4} (ln|ln eps|)² / |ln eps|^{1/4}`.
pub fn half_time_bound(sched: &ScalingSchedule) -> f64 {
    2.0 * sched.eps.powf(0.25) * sched.abs_log_eps.ln().powi(2) / sched.abs_log_eps.powf(0.25)
}

/// Frequencies of the `T_hat/2` bound on `‖u‖` and of the `T_hat` bound on
/// `‖u - sqrt(eps) Z‖`, and the pathwise cubic bound.
pub fn exp_u_minus_z(eps: f64, n_replicas: usize, ctx: &Context) -> Result<EnsembleSummary> {
    let th = &ctx.thresholds;
    let sched = make_schedule(eps, 1.0, 1.0)?;
    let cfg = ctx.solver_config(sched.l_eps)?;
    let reps = run_replicas(
        "u_minus_z",
        ctx.master_seed,
        n_replicas,
        ctx.threads,
        || (),
        |_, _, seed| stage1_replica(&sched, &cfg, seed, th.cubic_rel_tol),
    )?;
    let b_half = half_time_bound(&sched);
    let b_umz = umz_bound(&sched);
    let k_half = reps.iter().filter(|r| r.sup_u_half <= b_half).count();
    let k_umz = reps.iter().filter(|r| r.sup_diff < b_umz).count();
    let violations: u64 = reps.iter().map(|r| r.cubic_violations).sum();
    let worst = reps.iter().map(|r| r.cubic_ratio).fold(0.0, f64::max);

    let mut out = EnsembleSummary::new("u_minus_z", Some(sched), n_replicas);
    out.param("dx", cfg.dx);
    out.param("dt", cfg.dt);
    out.threshold("umz_freq", th.umz_freq);
    out.threshold("umz_wilson_lower", th.umz_wilson_lower);
    out.threshold("cubic_rel_tol", th.cubic_rel_tol);
    for (name, k) in [("half_time_event_frequency", k_half), ("umz_event_frequency", k_umz)] {
        let s = frequency_stat(name, k, n_replicas, th.wilson_z);
        let lo = s.interval.map_or(0.0, |i| i.0);
        let ok = s.value >= th.umz_freq && lo >= th.umz_wilson_lower;
        out.push(s.judged(th.umz_freq, ok));
    }
    out.push(Statistic::report("half_time_bound", b_half));
    out.push(Statistic::report("umz_bound", b_umz));
    out.push(Statistic::report("cubic_bound_violations", violations as f64).judged(0.0, violations == 0));
    out.push(Statistic::report("max_cubic_ratio", worst));
    let max_diff = reps.iter().map(|r| r.sup_diff).fold(0.0, f64::max);
    out.push(Statistic::report("max_sup_u_minus_z", max_diff));
    let max_half = reps.iter().map(|r| r.sup_u_half).fold(0.0, f64::max);
    out.push(Statistic::report("max_sup_u_half_time", max_half));
    let all_equal = reps.iter().all(|r| r.digests_equal);
    out.push(Statistic::report("panel_digests_equal", all_equal as u8 as f64).judged(1.0, all_equal));

    let mut table = Table::new("replicas", &["replica", "sup_u_half", "sup_z_half", "sup_u_minus_z", "cubic_ratio"]);
    for (i, r) in reps.iter().enumerate() {
        table.push(vec![i as f64, r.sup_u_half, r.sup_z_half, r.sup_diff, r.cubic_ratio]);
    }
    out.tables.push(table);
    Ok(out.finalize(true, th.min_replicas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Verdict;

    #[test]
    fn bounds_at_one_in_a_million() {
        let s = make_schedule(1e-6, 1.0, 1.0).unwrap();
        let ll = s.abs_log_eps.ln();
        assert!((umz_bound(&s) - 25.0 * ll.powi(6) / s.abs_log_eps.powf(0.75)).abs() < 1e-9);
        // The half-time bound is small: about 0.23.
        assert!(half_time_bound(&s) > 0.2 && half_time_bound(&s) < 0.25);
    }

    #[test]
    fn empty_excursion_set_is_vacuous() {
        let r = Stage1Replica {
            sup_u_half: 0.0,
            sup_z_half: 0.0,
            sup_diff: 0.0,
            cubic_violations: 0,
            cubic_ratio: 0.0,
            u_r: vec![0.1, 0.2],
            y_r: vec![0.1, 0.2],
            digests_equal: true,
        };
        assert_eq!(excursion_event(&r, 10.0, 0.1), None);
        assert_eq!(excursion_event(&r, 0.15, 0.1), Some(true));
        assert_eq!(excursion_event(&r, 0.05, 0.15), Some(false));
    }

    #[test]
    fn large_theta_is_vacuously_true() {
        let ctx = Context::default();
        let s = exp_stage1(1e-2, 50.0, 1.0, 8, &ctx).unwrap();
        assert_eq!(s.stat("event_frequency").unwrap().value, 1.0);
        assert_eq!(s.stat("vacuous_fraction").unwrap().value, 1.0);
        assert_eq!(s.verdict, Verdict::ReportOnly);
    }

    #[test]
    fn coupled_arms_share_the_panel() {
        let sched = make_schedule(1e-2, 1.0, 1.0).unwrap();
        let cfg = Context::default().solver_config(sched.l_eps).unwrap();
        let r = stage1_replica(&sched, &cfg, 11, 1e-6).unwrap();
        assert!(r.digests_equal);
        assert_eq!(r.cubic_violations, 0);
        assert!(r.sup_diff <= r.sup_z_half.max(1.0));
    }
}
