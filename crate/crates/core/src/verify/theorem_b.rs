//! Composite check: on the excursion set of `Y_eps`, `u(·, T^b)` is close to
//! `sgn(Y_eps)`.

use super::stage1::R_SPACING;
use super::stats::{median_ci, wilson};
use super::summary::{EnsembleSummary, Plot, Series, Statistic, Table};
use super::{run_replicas, Context};
use crate::error::{domain, Result};
use crate::scaling::{make_schedule, to_r_grid};
use crate::solver::{run_arms, Drift, Field, NoisePanel};

/// Pattern constants scanned next to the requested one.
pub const B_SCAN: [f64; 3] = [1.0, 3.0, 5.0];
/// Tolerances `δ` whose frequencies are reported.
pub const DELTAS: [f64; 2] = [0.3, 0.1];

/// `sup_{|Y| > level} |u - sgn Y|`, or `None` on an empty set.
pub fn sign_defect(y: &[f64], u: &[f64], level: f64) -> Option<f64> {
    let mut sup: Option<f64> = None;
    for (&yv, &uv) in y.iter().zip(u) {
        if yv.abs() > level {
            let d = (uv - yv.signum()).abs();
            sup = Some(sup.map_or(d, |s: f64| s.max(d)));
        }
    }
    sup
}

/// Sup statistic over the excursion set for each `b` in the scan.
pub fn exp_theorem_b(eps: f64, b: f64, theta: f64, k: f64, n_replicas: usize, ctx: &Context) -> Result<EnsembleSummary> {
    let th = &ctx.thresholds;
    if eps == 0.0 {
        let mut out = EnsembleSummary::new("theorem_b", None, n_replicas);
        out.push(Statistic::report("degenerate", 1.0));
        out.note("eps = 0: u stays 0, the excursion set is empty and the statistic is vacuous");
        return Ok(out.finalize(true, th.min_replicas));
    }
    if !(theta > 0.0) {
        return domain(format!("theta must be positive, got {theta}"));
    }
    let mut bs: Vec<f64> = B_SCAN.to_vec();
    if !bs.iter().any(|&x| (x - b).abs() < 1e-12) {
        bs.push(b);
    }
    bs.sort_by(f64::total_cmp);
    let scheds = bs.iter().map(|&bb| make_schedule(eps, bb, k)).collect::<Result<Vec<_>>>()?;
    let sched = make_schedule(eps, b, k)?;
    let l = sched.l_eps;
    let cfg = ctx.solver_config(l)?;
    let horizon = scheds.iter().map(|s| s.t_b).fold(sched.t_hat, f64::max);
    let mut times = vec![sched.t_hat];
    times.extend(scheds.iter().map(|s| s.t_b));
    let cfg = cfg.with_snapshots(times);
    let n = cfg.n_points(l);
    let level = sched.excursion_level(theta);

    // Per replica: one defect per b, `None` when the excursion set is empty.
    let reps = run_replicas(
        "theorem_b",
        ctx.master_seed,
        n_replicas,
        ctx.threads,
        || (),
        |_, _, seed| {
            let zero = Field::zeros(l, n);
            let panel = NoisePanel::new(seed, n - 2, cfg.dt, zero.dx);
            let run = run_arms(&[&zero, &zero], &[Drift::Full, Drift::Linear], horizon, eps, &cfg, Some(&panel), |_, _, _| {})?;
            let y = to_r_grid(&run.snapshots[1][0], &sched, R_SPACING)?.values;
            let mut out = Vec::with_capacity(bs.len());
            for j in 0..bs.len() {
                let u = to_r_grid(&run.snapshots[0][j + 1], &sched, R_SPACING)?.values;
                out.push(sign_defect(&y, &u, level));
            }
            Ok((out, run.digests[0] == run.digests[1]))
        },
    )?;

    let mut out = EnsembleSummary::new("theorem_b", Some(sched), n_replicas);
    out.param("theta", theta);
    out.param("b_scan", bs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    out.param("dx", cfg.dx);
    out.param("dt", cfg.dt);
    out.threshold("theorem_b_freq", th.theorem_b_freq);
    let vacuous = reps.iter().filter(|r| r.0[0].is_none()).count();
    let nonvac = n_replicas - vacuous;
    out.push(Statistic::report("vacuous_fraction", vacuous as f64 / n_replicas.max(1) as f64));
    out.push(Statistic::report("excursion_level", level));

    let mut table = Table::new("sup_by_b", &["b", "median", "median_lo", "median_hi", "freq_below_0.3", "freq_below_0.1"]);
    let mut medians = Vec::with_capacity(bs.len());
    let mut plot_b = vec![];
    let mut plot_m = vec![];
    for (j, &bb) in bs.iter().enumerate() {
        let sups: Vec<f64> = reps.iter().filter_map(|r| r.0[j]).collect();
        let mut freqs = [f64::NAN; 2];
        for (q, &d) in DELTAS.iter().enumerate() {
            let hits = sups.iter().filter(|&&s| s < d).count();
            let (lo, hi) = wilson(hits, nonvac, th.wilson_z);
            let f = hits as f64 / nonvac.max(1) as f64;
            freqs[q] = f;
            let stat = Statistic::report(format!("freq_sup_below_{d}_b_{bb}"), f).with_interval(lo, hi);
            let primary = (bb - b).abs() < 1e-12 && q == 0;
            out.push(if primary && nonvac > 0 { stat.judged(th.theorem_b_freq, f >= th.theorem_b_freq) } else { stat });
        }
        if let Some((m, lo, hi)) = median_ci(&sups, th.wilson_z) {
            out.push(Statistic::report(format!("median_sup_b_{bb}"), m).with_interval(lo, hi));
            table.push(vec![bb, m, lo, hi, freqs[0], freqs[1]]);
            medians.push((m, lo, hi));
            plot_b.push(bb);
            plot_m.push(m);
        }
    }
    if medians.len() == bs.len() && nonvac > 0 {
        // Each median may not exceed the upper end of the previous interval.
        let ok = medians.windows(2).all(|w| w[1].0 <= w[0].2);
        out.push(Statistic::report("median_nonincreasing_in_b", ok as u8 as f64).judged(1.0, ok));
    }
    let all_equal = reps.iter().all(|r| r.1);
    out.push(Statistic::report("panel_digests_equal", all_equal as u8 as f64).judged(1.0, all_equal));
    out.note("frequencies and medians are over replicas with a nonempty excursion set");
    if nonvac == 0 {
        out.note("every excursion set was empty: the statistic is degenerate");
    }
    let mut per = Table::new("replicas", &["replica"]);
    per.columns.extend(bs.iter().map(|bb| format!("sup_b_{bb}")));
    for (i, r) in reps.iter().enumerate() {
        let mut row = vec![i as f64];
        row.extend(r.0.iter().map(|s| s.unwrap_or(-1.0)));
        per.push(row);
    }
    out.tables = vec![table, per];
    out.plot = Some(Plot {
        title: format!("Median sign defect on the excursion set, eps = {eps:e}"),
        x_label: "b (time units)".into(),
        y_label: "median sup |u - sgn Y| (dimensionless)".into(),
        series: vec![Series::new("median", plot_b, plot_m)],
    });
    Ok(out.finalize(true, th.min_replicas))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defect_ignores_points_below_level() {
        let y = [0.1, -2.0, 3.0];
        let u = [0.0, -0.8, 0.95];
        assert_eq!(sign_defect(&y, &u, 5.0), None);
        let d = sign_defect(&y, &u, 1.0).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_is_flagged_degenerate() {
        let s = exp_theorem_b(0.0, 3.0, 1.0, 2.0, 10, &Context::default()).unwrap();
        assert!(s.stat("degenerate").is_some());
        assert!(s.notes[0].contains("vacuous"));
    }
}
