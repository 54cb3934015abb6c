//! Summaries for the non-verifying subcommands: kernel tables, covariance
//! curves and a single stochastic run.

use crate::error::Result;
use crate::gaussian::covariance::{cov_limit_y, cov_x_exact};
use crate::kernels::{heat_kernel_line, KernelParams};
use crate::scaling::make_schedule;
use crate::solver::{run_arms, Drift, Field, NoisePanel};
use crate::verify::theorem_a::centered_exact;
use crate::verify::{Context, EnsembleSummary, Plot, Series, Statistic, Table};

/// Times of the kernel table.
pub const KERNEL_TIMES: [f64; 4] = [0.05, 0.5, 5.0, 20.0];
/// Points per axis of the kernel table.
pub const KERNEL_POINTS: usize = 21;
/// Lag spacing and extent of the covariance curves.
pub const COV_DLAG: f64 = 0.1;
pub const COV_MAX_LAG: f64 = 3.0;

/// Images vs eigenfunctions for `h_L` on `[-L, L]`, `L = |ln eps|`.
pub fn kernels_report(eps: f64) -> Result<EnsembleSummary> {
    let sched = make_schedule(eps, 1.0, 1.0)?;
    let l = sched.l_eps;
    let p = KernelParams::new(l)?;
    let pts: Vec<f64> = (0..KERNEL_POINTS).map(|i| -l + 2.0 * l * i as f64 / (KERNEL_POINTS - 1) as f64).collect();
    let mut table = Table::new("kernels", &["t", "x", "y", "reflection", "spectral", "abs_diff", "whole_line"]);
    let mut mass = Table::new("survival_mass", &["t", "x", "mass"]);
    let mut max_diff: f64 = 0.0;
    let mut dominated = true;
    let mut monotone = true;
    let mut plot = vec![];
    let mut prev_mass: Option<Vec<f64>> = None;
    for &t in &KERNEL_TIMES {
        for &x in &pts {
            for &y in &pts {
                let r = p.dirichlet_reflection(x, y, t)?;
                let s = p.dirichlet_spectral(x, y, t)?;
                let h = heat_kernel_line(x, y, t)?;
                max_diff = max_diff.max((r - s).abs());
                dominated &= r <= h;
                table.push(vec![t, x, y, r, s, (r - s).abs(), h]);
            }
        }
        let m: Vec<f64> = pts.iter().map(|&x| p.survival_mass(x, t)).collect::<Result<_>>()?;
        if let Some(prev) = &prev_mass {
            monotone &= m.iter().zip(prev).all(|(a, b)| a <= b);
        }
        for (&x, &v) in pts.iter().zip(&m) {
            mass.push(vec![t, x, v]);
        }
        prev_mass = Some(m);
        let ys: Vec<f64> = (0..=200).map(|i| -l + 2.0 * l * i as f64 / 200.0).collect();
        let hs = ys.iter().map(|&y| p.dirichlet(0.0, y, t)).collect::<Result<Vec<_>>>()?;
        plot.push(Series::new(format!("t = {t}"), ys, hs));
    }
    let mut out = EnsembleSummary::new("kernels", Some(sched), 0);
    out.param("L", l);
    out.push(Statistic::report("max_abs_diff_reflection_spectral", max_diff));
    out.push(Statistic::report("dominated_by_whole_line", dominated as u8 as f64));
    out.push(Statistic::report("survival_mass_nonincreasing", monotone as u8 as f64));
    out.tables = vec![table, mass];
    out.plot = Some(Plot {
        title: format!("Dirichlet heat kernel h_L(0, y, t), L = {l:.4}"),
        x_label: "y (space units)".into(),
        y_label: "h_L(0, y, t) (1 / space units)".into(),
        series: plot,
    });
    Ok(out.finalize(false, 0))
}

/// Exact Dirichlet, exact whole-line and limit covariance of the normalized field at `T_hat`.
pub fn covariance_report(eps: f64, k: f64, lags: &[f64]) -> Result<EnsembleSummary> {
    let sched = make_schedule(eps, 1.0, k)?;
    let p = KernelParams::new(sched.l_eps)?;
    let c2 = sched.y_normalization().powi(2);
    let n = (COV_MAX_LAG / COV_DLAG).round() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|j| j as f64 * COV_DLAG).collect();
    grid.extend_from_slice(lags);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut table = Table::new("covariance", &["lag", "dirichlet_exact", "whole_line_exact", "limit"]);
    for &d in &grid {
        table.push(vec![d, centered_exact(&sched, &p, d)?, c2 * cov_x_exact(0.0, d, eps)?, cov_limit_y(d)]);
    }
    let mut out = EnsembleSummary::new("covariance", Some(sched), 0);
    for &d in lags {
        let exact = centered_exact(&sched, &p, d)?;
        out.push(Statistic::report(format!("exact_lag_{d}"), exact));
        out.push(Statistic::report(format!("gap_to_limit_lag_{d}"), exact - cov_limit_y(d)));
    }
    let col = |name: &str| table.column(name).expect("column");
    out.plot = Some(Plot {
        title: format!("Covariance of the normalized field at T_hat, eps = {eps:e}"),
        x_label: "lag (r units)".into(),
        y_label: "covariance (dimensionless)".into(),
        series: vec![
            Series::new("exact", col("lag"), col("dirichlet_exact")),
            Series::new("whole line", col("lag"), col("whole_line_exact")),
            Series::new("limit", col("lag"), col("limit")),
        ],
    });
    out.tables.push(table);
    Ok(out.finalize(false, 0))
}

/// One run from `u = 0` with the linear arm on the same noise; profiles at
/// `T_hat/2`, `T_hat` and `T^b` next to `sgn Y_eps`.
pub fn simulate_report(eps: f64, b: f64, theta: f64, k: f64, ctx: &Context) -> Result<EnsembleSummary> {
    let sched = make_schedule(eps, b, k)?;
    let l = sched.l_eps;
    let times = vec![0.5 * sched.t_hat, sched.t_hat, sched.t_b];
    let cfg = ctx.solver_config(l)?.with_snapshots(times.clone());
    let n = cfg.n_points(l);
    let zero = Field::zeros(l, n);
    let panel =
        NoisePanel::new(crate::rng::replica_seed(ctx.master_seed, crate::rng::experiment_id("simulate"), 0), n - 2, cfg.dt, zero.dx);
    let run = run_arms(&[&zero, &zero], &[Drift::Full, Drift::Linear], sched.t_b, eps, &cfg, Some(&panel), |_, _, _| {})?;
    let u = &run.snapshots[0];
    let y = &run.snapshots[1][1];
    let level = sched.excursion_level(theta);
    let sgn: Vec<f64> = y.values.iter().map(|v| if v.abs() > level { v.signum() } else { 0.0 }).collect();

    let mut table = Table::new("profiles", &["x", "u_half_t_hat", "u_t_hat", "u_t_b", "y_t_hat", "sgn_y_on_excursion"]);
    for i in 0..n {
        table.push(vec![u[0].x(i), u[0].values[i], u[1].values[i], u[2].values[i], y.values[i], sgn[i]]);
    }
    let mut defect: Option<f64> = None;
    for i in 0..n {
        if sgn[i] != 0.0 {
            let d = (u[2].values[i] - sgn[i]).abs();
            defect = Some(defect.map_or(d, |s: f64| s.max(d)));
        }
    }
    let mut out = EnsembleSummary::new("simulate", Some(sched), 1);
    out.param("theta", theta);
    out.param("dx", cfg.dx);
    out.param("dt", cfg.dt);
    out.param("noise_panel", panel.fingerprint());
    for (name, f) in ["half_t_hat", "t_hat", "t_b"].iter().zip(u) {
        out.push(Statistic::report(format!("sup_u_{name}"), f.sup_norm()));
    }
    out.push(Statistic::report("sup_y_t_hat", y.sup_norm()));
    out.push(Statistic::report("excursion_level", level));
    out.push(Statistic::report("excursion_points", sgn.iter().filter(|s| **s != 0.0).count() as f64));
    out.push(Statistic::report("sup_sign_defect_t_b", defect.unwrap_or(f64::NAN)));
    if defect.is_none() {
        out.note("the excursion set is empty on this run; the sign defect is undefined");
    }
    let x = u[0].positions();
    let mut series: Vec<Series> = u
        .iter()
        .zip(["u(T_hat/2)", "u(T_hat)", "u(T^b)"])
        .map(|(f, name)| Series::new(format!("{name}, t = {:.2}", f.time), x.clone(), f.values.clone()))
        .collect();
    series.push(Series::new("sgn Y", x.clone(), y.values.iter().map(|v| v.signum()).collect()));
    out.plot = Some(Plot {
        title: format!("Profiles from u = 0, eps = {eps:e}, b = {b}"),
        x_label: "x (space units)".into(),
        y_label: "u(x, t) (dimensionless)".into(),
        series,
    });
    out.tables.push(table);
    Ok(out.finalize(false, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_tables_agree() {
        let s = kernels_report(1e-2).unwrap();
        assert!(s.stat("max_abs_diff_reflection_spectral").unwrap().value < 1e-10);
        assert_eq!(s.stat("dominated_by_whole_line").unwrap().value, 1.0);
        assert_eq!(s.stat("survival_mass_nonincreasing").unwrap().value, 1.0);
        assert_eq!(s.tables[0].rows.len(), KERNEL_TIMES.len() * KERNEL_POINTS * KERNEL_POINTS);
    }

    #[test]
    fn covariance_curves_start_near_one() {
        let s = covariance_report(1e-6, 2.0, &[0.0, 1.0]).unwrap();
        let t = &s.tables[0];
        assert_eq!(t.column("limit").unwrap()[0], 1.0);
        assert!((t.column("dirichlet_exact").unwrap()[0] - 1.0).abs() < 0.1);
        assert_eq!(s.plot.as_ref().unwrap().series.len(), 3);
    }

    #[test]
    fn simulation_is_reproducible() {
        let ctx = Context::default().with_seed(5);
        let a = simulate_report(1e-2, 1.0, 1.0, 1.0, &ctx).unwrap();
        let b = simulate_report(1e-2, 1.0, 1.0, 1.0, &ctx).unwrap();
        assert_eq!(a.tables[0].rows, b.tables[0].rows);
        assert_eq!(a.tables[0].rows[0][3], 0.0);
    }
}
