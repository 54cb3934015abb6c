//! Distance between the whole-line field `X_eps` and the Dirichlet field
//! `Y_eps` on the interior band `|r| <= c L_tilde`, by quadrature.

use super::summary::{EnsembleSummary, Plot, Series, Statistic, Table};
use super::Context;
use crate::error::{domain, Result};
use crate::gaussian::covariance::{delta_xy_bound, delta_xy_variance};
use crate::kernels::KernelParams;
use crate::scaling::make_schedule;

/// Points of the r-grid on `[0, c L_tilde]` (the defect is even in r).
pub const R_POINTS: usize = 21;

/// Table of `sup_{|r| <= c L_tilde} T_hat^{1/2} E(X - Y)²` against
/// `eps^{2(1-c)²}` and the explicit bound.
pub fn exp_lemma_xy(eps_list: &[f64], c: f64, ctx: &Context) -> Result<EnsembleSummary> {
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("c must lie in (0, 1), got {c}"));
    }
    if eps_list.is_empty() {
        return domain("eps list is empty");
    }
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out = EnsembleSummary::new("lemma_xy", Some(make_schedule(eps_sorted[0], 1.0, 1.0)?), 0);
    out.param("c", c);
    out.param("eps_list", eps_sorted.iter().map(|e| format!("{e:e}")).collect::<Vec<_>>().join(" "));
    let mut table = Table::new("lemma_xy", &["eps", "sup_scaled", "at_center_scaled", "power_bound", "ratio", "explicit_bound_scaled"]);
    let mut ratios = Vec::with_capacity(eps_sorted.len());
    let mut all_below = true;
    let mut boundary_larger = true;
    for &eps in &eps_sorted {
        let sched = make_schedule(eps, 1.0, 1.0)?;
        let p = KernelParams::new(sched.l_eps)?;
        let r_max = c * sched.l_tilde;
        let scale = sched.t_hat.sqrt();
        let mut sup: f64 = 0.0;
        for j in 0..R_POINTS {
            let r = r_max * j as f64 / (R_POINTS - 1) as f64;
            sup = sup.max(delta_xy_variance(r, eps, c, &p)?);
        }
        let centre = delta_xy_variance(0.0, eps, c, &p)?;
        let edge = delta_xy_variance(r_max, eps, c, &p)?;
        boundary_larger &= edge > centre;
        let power = eps.powf(2.0 * (1.0 - c).powi(2));
        let bound = delta_xy_bound(eps, c, sched.l_eps)?;
        all_below &= sup <= bound;
        let ratio = scale * sup / power;
        ratios.push(ratio);
        table.push(vec![eps, scale * sup, scale * centre, power, ratio, scale * bound]);
        out.push(Statistic::report(format!("ratio_eps_{eps:e}"), ratio));
        out.push(Statistic::report(format!("sup_scaled_eps_{eps:e}"), scale * sup).against(scale * bound));
    }
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    out.push(Statistic::report("ratio_decreasing", decreasing as u8 as f64).judged(1.0, decreasing));
    out.push(Statistic::report("below_explicit_bound", all_below as u8 as f64).judged(1.0, all_below));
    out.push(Statistic::report("boundary_exceeds_centre", boundary_larger as u8 as f64));
    let eps_col = table.column("eps").expect("column").iter().map(|e| e.log10()).collect::<Vec<_>>();
    out.plot = Some(Plot {
        title: format!("Interior defect E(X - Y)^2, c = {c}"),
        x_label: "log10 eps".into(),
        y_label: "log10 of T_hat^(1/2) sup E(X - Y)^2 (dimensionless)".into(),
        series: vec![
            Series::new("quadrature", eps_col.clone(), table.column("sup_scaled").expect("column").iter().map(|v| v.log10()).collect()),
            Series::new(
                "eps^(2(1-c)^2)",
                eps_col.clone(),
                table.column("power_bound").expect("column").iter().map(|v| v.log10()).collect(),
            ),
            Series::new(
                "explicit bound",
                eps_col,
                table.column("explicit_bound_scaled").expect("column").iter().map(|v| v.log10()).collect(),
            ),
        ],
    });
    out.tables.push(table);
    Ok(out.finalize(false, ctx.thresholds.min_replicas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Verdict;

    #[test]
    fn c_near_one_makes_the_power_bound_trivial() {
        let s = exp_lemma_xy(&[1e-2], 0.99, &Context::default()).unwrap();
        let power = s.tables[0].column("power_bound").unwrap()[0];
        assert!(power > 0.99);
        assert!(s.tables[0].column("ratio").unwrap()[0] < 1.0);
    }

    #[test]
    fn default_sweep_passes() {
        let s = exp_lemma_xy(&[1e-2, 1e-4, 1e-6], 0.5, &Context::default()).unwrap();
        assert_eq!(s.verdict, Verdict::Pass, "{:?}", s.statistics);
        assert_eq!(s.stat("boundary_exceeds_centre").unwrap().value, 1.0);
    }
}
