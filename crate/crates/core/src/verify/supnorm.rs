//! Space-time sup of `sqrt(eps) |Z_eps|` on `[-L, L] × [0, |ln eps|/(2 + ρ)]`
//! against the threshold `eps^{1/2 - 1/(2+ρ)} (ln|ln eps|)² / |ln eps|^{1/4}`.
//!
//! Paths are sampled exactly at grid points only, so the empirical sup
//! undercounts the continuum sup.

use super::stats::{mean_se, wilson};
use super::summary::{EnsembleSummary, Statistic, Table};
use super::{run_replicas, Context};
use crate::error::{domain, Result};
use crate::gaussian::budget::{sup_norm_budget, BudgetConstants};
use crate::gaussian::modes::{PathSampler, PATH_REL_TOL};
use crate::kernels::KernelParams;
use crate::rng::rng_from;
use crate::scaling::make_schedule;
use crate::solver::SolverConfig;

/// Space step of the path grid.
pub const X_SPACING: f64 = 0.1;
/// Time step of the path grid.
pub const T_SPACING: f64 = 0.05;

/// Exceedance frequency at horizon `|ln eps|/(2 + ρ)`, with the threshold
/// multiplied by `scale` (1 for the real check).
pub fn exp_supnorm(eps: f64, rho: f64, n_replicas: usize, scale: f64, ctx: &Context) -> Result<EnsembleSummary> {
    let th = &ctx.thresholds;
    if !(scale > 0.0) {
        return domain(format!("threshold scale must be positive, got {scale}"));
    }
    let sched = make_schedule(eps, 1.0, 1.0)?;
    let l = sched.l_eps;
    let budget = sup_norm_budget(eps, rho, l, BudgetConstants::default())?;
    let horizon = budget.t;
    let steps = (horizon / T_SPACING).ceil() as usize;
    let t_points: Vec<f64> = (1..=steps).map(|j| horizon * j as f64 / steps as f64).collect();
    let (m, dx) = SolverConfig::grid(l, X_SPACING);
    let p = KernelParams::new(l)?;
    let sampler = PathSampler::new(&t_points, m, &p, PATH_REL_TOL)?;
    let n_modes = sampler.n_modes();
    let sups = run_replicas(
        "supnorm",
        ctx.master_seed,
        n_replicas,
        ctx.threads,
        || sampler.clone(),
        |s, _, seed| {
            let mut rng = rng_from(seed);
            let mut sup: f64 = 0.0;
            s.run(eps, &mut rng, |f| sup = sup.max(f.sup_norm()));
            Ok(sup)
        },
    )?;
    let lambda = budget.threshold * scale;
    let exceed = sups.iter().filter(|&&s| s > lambda).count();
    let (lo, hi) = wilson(exceed, n_replicas, th.wilson_z);
    let freq = exceed as f64 / n_replicas.max(1) as f64;

    let mut out = EnsembleSummary::new("supnorm", Some(sched), n_replicas);
    out.param("rho", rho);
    out.param("threshold_scale", scale);
    out.param("horizon", horizon);
    out.param("grid_dx", dx);
    out.param("grid_dt", horizon / steps as f64);
    out.param("modes", n_modes);
    out.threshold("supnorm_exceed_freq", th.supnorm_exceed_freq);
    out.threshold("gamma_freq", th.gamma_freq);
    let stat = Statistic::report("exceedance_frequency", freq).with_interval(lo, hi);
    out.push(if scale == 1.0 {
        stat.judged(th.supnorm_exceed_freq, freq <= th.supnorm_exceed_freq)
    } else {
        stat.against(th.supnorm_exceed_freq)
    });
    if scale == 1.0 && (rho - 2.0).abs() < 1e-12 {
        let (glo, ghi) = wilson(n_replicas - exceed, n_replicas, th.wilson_z);
        let g = 1.0 - freq;
        out.push(Statistic::report("gamma_event_frequency", g).with_interval(glo, ghi).judged(th.gamma_freq, g >= th.gamma_freq));
    }
    let (mean, se) = mean_se(&sups);
    out.push(Statistic::report("mean_sup", mean).with_stderr(se));
    out.push(Statistic::report("max_sup", sups.iter().copied().fold(0.0, f64::max)));
    out.push(Statistic::report("threshold", lambda));
    out.push(Statistic::report("threshold_over_mean_sup", lambda / mean));
    out.push(Statistic::report("budget_sigma_bar_sq", budget.sigma_bar_sq));
    out.push(Statistic::report("budget_sigma_bar_sq_exact", budget.sigma_bar_sq_exact));
    out.push(Statistic::report("budget_esup_bound", budget.esup_bound));
    out.push(Statistic::report("budget_entropy_integral", budget.entropy_integral));
    out.push(Statistic::report("budget_threshold_z", budget.threshold_z));
    out.push(Statistic::report("budget_tail_prob_bound", budget.tail_prob_bound));
    out.note("sup taken over the sampling grid only; the continuum sup is larger");
    out.note("budget constants are set to 1; the bounds hold only up to these constants");
    let mut table = Table::new("sups", &["replica", "sup"]);
    for (i, &s) in sups.iter().enumerate() {
        table.push(vec![i as f64, s]);
    }
    out.tables.push(table);
    Ok(out.finalize(true, th.min_replicas))
}
