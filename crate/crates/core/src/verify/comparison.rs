//! Pathwise ordering of the comparison variants on shared noise.

use super::summary::{EnsembleSummary, Statistic, Table};
use super::{run_replicas, Context};
use crate::error::Result;
use crate::scaling::make_schedule;
use crate::solver::{plateau, run_comparison_triple, NoisePanel};

/// Height and edge width of the common initial plateau.
pub const INIT_HEIGHT: f64 = 0.3;
pub const INIT_WIDTH: f64 = 1.0;

/// Count ordering violations `phi1 <= full <= phi2` and `phi1 <= linear <= phi2`
/// over every step and snapshot of `n_replicas` runs to `T_hat`.
pub fn exp_comparison(eps: f64, n_replicas: usize, ctx: &Context) -> Result<EnsembleSummary> {
    let th = &ctx.thresholds;
    let sched = make_schedule(eps, 1.0, 1.0)?;
    let l = sched.l_eps;
    let cfg = ctx.solver_config(l)?.with_snapshots(vec![0.5 * sched.t_hat, sched.t_hat]);
    let n = cfg.n_points(l);
    let init = plateau(l, n, INIT_HEIGHT, INIT_WIDTH);
    let reps = run_replicas(
        "comparison",
        ctx.master_seed,
        n_replicas,
        ctx.threads,
        || (),
        |_, _, seed| {
            let panel = NoisePanel::new(seed, n - 2, cfg.dt, init.dx);
            let run = run_comparison_triple(&init, sched.t_hat, eps, &cfg, &panel)?;
            let same = run.digests.windows(2).all(|w| w[0] == w[1]);
            Ok((run.violations, run.linear_violations, run.max_excess, same))
        },
    )?;
    let v: u64 = reps.iter().map(|r| r.0).sum();
    let lv: u64 = reps.iter().map(|r| r.1).sum();
    let excess = reps.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    let same = reps.iter().all(|r| r.3);

    let mut out = EnsembleSummary::new("comparison", Some(sched), n_replicas);
    out.param("init_height", INIT_HEIGHT);
    out.param("dx", cfg.dx);
    out.param("dt", cfg.dt);
    out.threshold("comparison_tol", th.comparison_tol);
    out.push(Statistic::report("ordering_violations", v as f64));
    out.push(Statistic::report("linear_ordering_violations", lv as f64));
    out.push(Statistic::report("max_excess", excess).judged(th.comparison_tol, excess <= th.comparison_tol));
    out.push(Statistic::report("panel_digests_equal", same as u8 as f64).judged(1.0, same));
    let mut table = Table::new("replicas", &["replica", "violations", "linear_violations", "max_excess"]);
    for (i, r) in reps.iter().enumerate() {
        table.push(vec![i as f64, r.0 as f64, r.1 as f64, r.2]);
    }
    out.tables.push(table);
    out.note("max_excess is the largest ordering excess, floored at 0");
    Ok(out.finalize(true, th.min_replicas))
}
