//! Scales derived from the noise intensity and the x <-> r rescaling.

use crate::error::{domain, Result};
use crate::gaussian::covariance::critical_time;
use crate::solver::Field;
use std::f64::consts::PI;

/// Every eps-derived scale for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSchedule {
    pub eps: f64,
    pub abs_log_eps: f64,
    /// Half-length of the interval, `|ln eps|` unless a multiplier was given.
    pub l_eps: f64,
    pub t_hat: f64,
    pub tau: f64,
    pub b: f64,
    pub t_b: f64,
    pub tau_hat_b: f64,
    pub k: f64,
    pub k_eps: f64,
    pub l_tilde: f64,
    /// Time at which `eps * E[Z(0,t)^2] = 1` for the whole-line field.
    pub bb_t: f64,
}

/// Schedule with `L = |ln eps|`.
pub fn make_schedule(eps: f64, b: f64, k: f64) -> Result<ScalingSchedule> {
    make_schedule_with_length(eps, b, k, 1.0)
}

/// Schedule with `L = multiplier * |ln eps|`.
pub fn make_schedule_with_length(eps: f64, b: f64, k: f64, multiplier: f64) -> Result<ScalingSchedule> {
    if !(eps > 0.0 && eps < (-1.0f64).exp()) {
        return domain(format!("eps must lie in (0, 1/e), got {eps}"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return domain(format!("pattern constant b must be positive, got {b}"));
    }
    if !(k > 0.0 && k.is_finite()) {
        return domain(format!("window half-width K must be positive, got {k}"));
    }
    if !(multiplier >= 1.0 && multiplier.is_finite()) {
        return domain(format!("length multiplier must be >= 1, got {multiplier}"));
    }
    let a = eps.ln().abs();
    let l_eps = multiplier * a;
    let k_eps = k * a.sqrt();
    if k_eps >= l_eps {
        return domain(format!("K sqrt|ln eps| = {k_eps} must be smaller than L = {l_eps}; reduce K or eps"));
    }
    let t_hat = a / 2.0;
    let tau_hat_b = 0.25 * a.ln() + b;
    Ok(ScalingSchedule {
        eps,
        abs_log_eps: a,
        l_eps,
        t_hat,
        tau: a / 4.0,
        b,
        t_b: t_hat + tau_hat_b,
        tau_hat_b,
        k,
        k_eps,
        l_tilde: l_eps / a.sqrt(),
        bb_t: critical_time(eps)?,
    })
}

impl ScalingSchedule {
    /// Factor `(8π|ln eps|)^{1/4}` that normalizes `Y_eps` to unit variance in the limit.
    pub fn y_normalization(&self) -> f64 {
        (8.0 * PI * self.abs_log_eps).powf(0.25)
    }

    /// `ϑ |ln eps|^{-1/4}`, the excursion level.
    pub fn excursion_level(&self, theta: f64) -> f64 {
        theta * self.abs_log_eps.powf(-0.25)
    }

    /// Key-value pairs for result manifests.
    pub fn manifest_entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("eps", self.eps),
            ("abs_log_eps", self.abs_log_eps),
            ("L_eps", self.l_eps),
            ("T_hat", self.t_hat),
            ("tau", self.tau),
            ("b", self.b),
            ("T_b", self.t_b),
            ("tau_hat_b", self.tau_hat_b),
            ("K", self.k),
            ("K_eps", self.k_eps),
            ("L_tilde", self.l_tilde),
            ("bbT", self.bb_t),
        ]
    }
}

/// Uniform r-grid on `[-K, K]` with spacing at most `max_dr`.
pub fn r_grid(k: f64, max_dr: f64) -> Vec<f64> {
    let n = ((2.0 * k / max_dr - 1e-9).ceil() as usize).max(1);
    let dr = 2.0 * k / n as f64;
    (0..=n).map(|i| -k + i as f64 * dr).collect()
}

/// Linear-interpolation stencil `(i, w)` with `f(x) ≈ (1-w) f_i + w f_{i+1}`.
pub fn stencil(field: &Field, x: f64) -> Result<(usize, f64)> {
    let n = field.n_points();
    let s = (x - field.x_min) / field.dx;
    let slack = 1e-9;
    if !(s >= -slack && s <= (n - 1) as f64 + slack) {
        return domain(format!("point {x} outside the field grid [{}, {}]", field.x_min, field.x_max()));
    }
    let s = s.clamp(0.0, (n - 1) as f64);
    let i = (s.floor() as usize).min(n - 2);
    Ok((i, s - i as f64))
}

/// Restrict a physical-space field to `r ∈ [-K, K]` with `x = r sqrt|ln eps|`.
pub fn to_r_grid(field: &Field, sched: &ScalingSchedule, max_dr: f64) -> Result<Field> {
    if field.x_min > -sched.k_eps + 1e-9 || field.x_max() < sched.k_eps - 1e-9 {
        return domain(format!(
            "field grid [{}, {}] does not cover [-K_eps, K_eps] = [-{k}, {k}]",
            field.x_min,
            field.x_max(),
            k = sched.k_eps
        ));
    }
    let rs = r_grid(sched.k, max_dr);
    let s = sched.abs_log_eps.sqrt();
    let mut values = Vec::with_capacity(rs.len());
    for &r in &rs {
        let (i, w) = stencil(field, r * s)?;
        values.push((1.0 - w) * field.values[i] + w * field.values[i + 1]);
    }
    let dr = if rs.len() > 1 { rs[1] - rs[0] } else { 0.0 };
    Ok(Field { x_min: -sched.k, dx: dr, values, time: field.time })
}

/// Multiply by `(8π|ln eps|)^{1/4}`.
pub fn normalize_y(field_r: &Field, sched: &ScalingSchedule) -> Field {
    let c = sched.y_normalization();
    let mut out = field_r.clone();
    out.values.iter_mut().for_each(|v| *v *= c);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn arithmetic_at_one_in_a_million() {
        let s = make_schedule(1e-6, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(s.abs_log_eps, 13.815510557964274, epsilon = 1e-12);
        assert_abs_diff_eq!(s.t_hat, 6.907755278982137, epsilon = 1e-12);
        assert_abs_diff_eq!(s.l_eps, 13.815510557964274, epsilon = 1e-12);
        assert!((s.t_b - s.t_hat - s.tau_hat_b).abs() <= 4.0 * f64::EPSILON * s.t_b);
        assert!(s.bb_t > s.t_hat + 0.25 * (s.abs_log_eps / 2.0).ln());
        assert_abs_diff_eq!(s.y_normalization(), (8.0 * PI * s.abs_log_eps).powf(0.25), epsilon = 0.0);
        assert!((s.y_normalization() - 4.3166).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_schedule(1e-6, 0.0, 2.0).is_err());
        assert!(make_schedule(0.5, 1.0, 0.1).is_err());
        assert!(make_schedule(2.0, 1.0, 1.0).is_err());
        // K sqrt|ln eps| >= |ln eps|
        assert!(make_schedule(1e-6, 1.0, 4.0).is_err());
    }

    #[test]
    fn rescaling_maps() {
        let s = make_schedule(1e-6, 1.0, 2.0).unwrap();
        let mut f = Field::zeros(s.l_eps, 2001);
        f.values.iter_mut().for_each(|v| *v = 0.7);
        let r = to_r_grid(&f, &s, 0.05).unwrap();
        assert!(r.values.iter().all(|&v| (v - 0.7).abs() < 1e-15));
        assert!(r.dx <= 0.05 + 1e-12);
        let mid = r.n_points() / 2;
        assert_abs_diff_eq!(r.x(mid), 0.0, epsilon = 1e-12);

        let a = s.abs_log_eps;
        let mut g = Field::zeros(s.l_eps, 2001);
        for i in 0..g.n_points() {
            let x = g.x(i);
            g.values[i] = (-x * x / (2.0 * a)).exp();
        }
        let gr = to_r_grid(&g, &s, 0.05).unwrap();
        let err = (0..gr.n_points()).map(|i| (gr.values[i] - (-gr.x(i).powi(2) / 2.0).exp()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "interpolation error {err}");

        let n1 = normalize_y(&gr, &s);
        let n2 = normalize_y(&n1, &s);
        assert!((n2.values[mid] - n1.values[mid]).abs() > 1e-3);
        let z = normalize_y(&Field::zeros(2.0, 11), &s);
        assert!(z.values.iter().all(|&v| v == 0.0));

        let short = Field::zeros(2.0, 11);
        assert!(to_r_grid(&short, &s, 0.05).is_err());
    }

    #[test]
    fn bbt_exceeds_lower_bound_on_sweep() {
        for k in 2..=12 {
            let eps = 10f64.powi(-k);
            let s = make_schedule(eps, 1.0, 0.5).unwrap();
            assert!(s.bb_t > s.t_hat + 0.25 * (s.abs_log_eps / 2.0).ln());
        }
    }

    proptest! {
        #[test]
        fn monotone_in_eps(e1 in 2.0f64..12.0, de in 0.1f64..3.0) {
            let a = make_schedule(10f64.powf(-e1), 1.0, 0.5).unwrap();
            let b = make_schedule(10f64.powf(-(e1 + de)), 1.0, 0.5).unwrap();
            prop_assert!(b.t_hat > a.t_hat);
            prop_assert!(b.l_eps > a.l_eps);
            prop_assert!(b.bb_t > a.bb_t);
            prop_assert!((a.t_b - a.t_hat - a.tau_hat_b).abs() <= 4.0 * f64::EPSILON * a.t_b);
        }
    }
}
