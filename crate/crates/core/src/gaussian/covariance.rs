//! Exact covariances of the stochastic convolution by quadrature.
//!
//! Every integral over `s ∈ [0, t]` with a `1/sqrt(t - s)` endpoint singularity
//! is rewritten with `t - s = q²`, which leaves a smooth integrand for composite
//! Gauss-Legendre.

use crate::error::{domain, Result};
use crate::kernels::{gauss, normal_mass, KernelParams};
use crate::quadrature::{gl16, GaussLegendre};
use std::f64::consts::PI;

/// Default number of 16-point panels for [`cov_z_eps`] (2048 nodes).
pub const COV_PANELS: usize = 128;

fn check_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0, 1), got {eps}"));
    }
    Ok(eps.ln().abs())
}

/// `E[Z(x,T)^2] = ∫_0^T e^{2s} / sqrt(4πs) ds` for the whole-line field.
pub fn variance_z_line(t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("variance horizon must be positive, got {t}"));
    }
    Ok(variance_z_line_unchecked(t))
}

fn variance_z_line_unchecked(t: f64) -> f64 {
    // (1/sqrt(π)) ∫_0^{sqrt T} e^{2q²} dq; panel width ~ 1/sqrt(T) tracks the e^{4 sqrt(T) q} growth.
    let a = t.sqrt();
    let panels = (2.0 * t).ceil() as usize + 4;
    gl16().composite(0.0, a, panels, |q| (2.0 * q * q).exp()) / PI.sqrt()
}

/// The time `T` solving `eps * variance_z_line(T) = 1`.
///
/// Bisection on `[|ln eps|/2, |ln eps|]` (widened if needed) followed by Newton
/// on `ln v(T) + ln eps`.
pub fn critical_time(eps: f64) -> Result<f64> {
    let le = eps.ln();
    check_eps(eps)?;
    let f = |t: f64| variance_z_line_unchecked(t).ln() + le;
    let mut lo = le.abs() / 2.0;
    let mut hi = le.abs();
    while f(lo) > 0.0 {
        lo /= 2.0;
    }
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-3 {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..50 {
        let v = variance_z_line_unchecked(t);
        let dv = (2.0 * t).exp() / (4.0 * PI * t).sqrt();
        let step = (v.ln() + le) / (dv / v);
        t -= step;
        if step.abs() < 1e-13 * t.max(1.0) {
            break;
        }
    }
    Ok(t)
}

/// Asymptote `e^{2T} / (2 sqrt(4πT))` of [`variance_z_line`].
pub fn variance_z_line_asymptote(t: f64) -> f64 {
    (2.0 * t).exp() / (2.0 * (4.0 * PI * t).sqrt())
}

fn time_breaks(m: f64, d: f64) -> Vec<f64> {
    let top = m.sqrt();
    let mut b = vec![0.0];
    if d > 0.0 {
        let c = (d / 2.0).sqrt();
        for f in [0.25, 1.0, 4.0] {
            if c * f < top {
                b.push(c * f);
            }
        }
    }
    b.push(top);
    b
}

fn integrate_breaks(rule: &GaussLegendre, breaks: &[f64], panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let total = breaks[breaks.len() - 1] - breaks[0];
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        let n = ((panels as f64 * (w[1] - w[0]) / total).ceil() as usize).max(4);
        acc += rule.composite(w[0], w[1], n, &f);
    }
    acc
}

/// Covariance `E[Z_eps(x,t) Z_eps(x',t')]` of the Dirichlet stochastic convolution.
pub fn cov_z_eps(x: f64, xp: f64, t: f64, tp: f64, p: &KernelParams) -> Result<f64> {
    cov_z_eps_panels(x, xp, t, tp, p, COV_PANELS)
}

/// [`cov_z_eps`] with an explicit number of 16-point panels.
pub fn cov_z_eps_panels(x: f64, xp: f64, t: f64, tp: f64, p: &KernelParams, panels: usize) -> Result<f64> {
    for z in [x, xp] {
        if !(z.abs() <= p.l * (1.0 + 1e-12)) {
            return domain(format!("position {z} outside [-{l}, {l}]", l = p.l));
        }
    }
    if !(t > 0.0 && tp > 0.0) {
        return domain(format!("covariance times must be positive, got {t}, {tp}"));
    }
    let (x, xp) = (x.clamp(-p.l, p.l), xp.clamp(-p.l, p.l));
    if x.abs() == p.l || xp.abs() == p.l {
        return Ok(0.0);
    }
    let m = t.min(tp);
    let d = (t - tp).abs();
    let f = |q: f64| {
        let s = d + 2.0 * q * q;
        if s <= 0.0 {
            return 0.0;
        }
        2.0 * q * s.exp() * p.dirichlet_unchecked(x, xp, s)
    };
    let f0 = |q: f64| {
        // d = 0: 2q e^{2q²} h_L(x,x',2q²), with the q in front cancelling the kernel's 1/sqrt(4π q²).
        if q == 0.0 {
            return if x == xp { 1.0 / PI.sqrt() } else { 0.0 };
        }
        let s = 2.0 * q * q;
        2.0 * q * s.exp() * p.dirichlet_unchecked(x, xp, s)
    };
    let breaks = time_breaks(m, d);
    Ok(if d > 0.0 { integrate_breaks(gl16(), &breaks, panels, f) } else { integrate_breaks(gl16(), &breaks, panels, f0) })
}

/// Whole-line counterpart of [`cov_z_eps`]; depends on `x - x'` only.
pub fn cov_z_line(x: f64, xp: f64, t: f64, tp: f64) -> Result<f64> {
    if !(t > 0.0 && tp > 0.0) {
        return domain(format!("covariance times must be positive, got {t}, {tp}"));
    }
    let m = t.min(tp);
    let d = (t - tp).abs();
    let delta = x - xp;
    let f = |q: f64| {
        let s = d + 2.0 * q * q;
        if s <= 0.0 {
            return if delta == 0.0 { 1.0 / PI.sqrt() } else { 0.0 };
        }
        2.0 * q * s.exp() * gauss(delta, s)
    };
    Ok(integrate_breaks(gl16(), &time_breaks(m, d), COV_PANELS, f))
}

/// Covariance of `X_eps(r) = sqrt(eps) Z(r sqrt|ln eps|, T_hat)` for the whole-line field.
pub fn cov_x_exact(r: f64, rp: f64, eps: f64) -> Result<f64> {
    let a = check_eps(eps)?;
    let t_hat = a / 2.0;
    let d2 = (r - rp).powi(2) * a;
    let top = t_hat.sqrt();
    let f = |q: f64| {
        if q == 0.0 {
            return if d2 == 0.0 { (-2.0 * t_hat).exp() } else { 0.0 };
        }
        (2.0 * q * q - 2.0 * t_hat - d2 / (4.0 * q * q)).exp()
    };
    Ok(gl16().composite(0.0, top, COV_PANELS, f) / PI.sqrt())
}

/// Asymptotic form `e^{-Δ²/2} / (2 sqrt(2π) sqrt|ln eps|)` of [`cov_x_exact`].
pub fn cov_x_asymptotic(r: f64, rp: f64, eps: f64) -> Result<f64> {
    let a = check_eps(eps)?;
    Ok((-(r - rp).powi(2) / 2.0).exp() / (2.0 * (2.0 * PI).sqrt() * a.sqrt()))
}

/// `∫_0^1 e^{-u |ln eps|} e^{-Δ²/(2(1-u))} / sqrt(1-u) du`, the Laplace-type
/// integral behind the covariance of `X_eps`; `|ln eps|` times it tends to `e^{-Δ²/2}`.
pub fn laplace_integral(delta: f64, eps: f64) -> Result<f64> {
    let a = check_eps(eps)?;
    // 1 - u = w²; integrand 2 e^{-a(1-w²)} e^{-Δ²/(2w²)}, smooth on [0, 1].
    let f = |w: f64| {
        if w == 0.0 {
            return 0.0;
        }
        2.0 * (-a * (1.0 - w * w) - delta * delta / (2.0 * w * w)).exp()
    };
    let panels = (a.ceil() as usize).max(8) * 4;
    Ok(gl16().composite(0.0, 1.0, panels, f))
}

/// Limit covariance `e^{-Δ²/2}`.
pub fn cov_limit_y(dr: f64) -> f64 {
    (-dr * dr / 2.0).exp()
}

/// `E[X_eps(r+h) - X_eps(r)]^2`.
pub fn increment_var_x(_r: f64, h: f64, eps: f64) -> Result<f64> {
    let a = check_eps(eps)?;
    if !(h >= 0.0) {
        return domain(format!("separation must be nonnegative, got {h}"));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    let t_hat = a / 2.0;
    let c = h * h * a / 4.0;
    let f = |q: f64| {
        let g = if q == 0.0 { 1.0 } else { -(-c / (q * q)).exp_m1() };
        (2.0 * q * q - 2.0 * t_hat).exp() * g
    };
    Ok(2.0 / PI.sqrt() * gl16().composite(0.0, t_hat.sqrt(), COV_PANELS, f))
}

/// Large-`T_hat` form `(1 - e^{-h²/2}) / (2 sqrt(π T_hat))` of [`increment_var_x`].
pub fn increment_var_x_asymptote(h: f64, eps: f64) -> Result<f64> {
    let a = check_eps(eps)?;
    Ok(-(-h * h / 2.0).exp_m1() / (2.0 * (PI * a / 2.0).sqrt()))
}

/// Image charges `(center, sign)` of `h - h_L` seen from `x`.
fn images(x: f64, l: f64, jm: i64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(4 * jm as usize + 2);
    for j in -jm..=jm {
        let s = 4.0 * j as f64 * l;
        if j != 0 {
            out.push((x - s, -1.0));
        }
        out.push((s + 2.0 * l - x, 1.0));
    }
    out
}

/// `∫ (h(x,y,τ) - h_L(x,y,τ) 1_{|y|<L})² dy`.
fn kernel_defect_l2(x: f64, tau: f64, p: &KernelParams) -> f64 {
    let l = p.l;
    let sh = (tau / 2.0).sqrt();
    let outside = gauss(0.0, 2.0 * tau) * (1.0 - normal_mass((-l - x) / sh, (l - x) / sh));
    let im = images(x, l, p.reflection_terms(tau) as i64 + 1);
    let mut inside = 0.0;
    for (i, &(a, sa)) in im.iter().enumerate() {
        for &(b, sb) in &im[i..] {
            let w = if a == b { 1.0 } else { 2.0 };
            let m = 0.5 * (a + b);
            inside += w * sa * sb * gauss(a - b, 2.0 * tau) * normal_mass((-l - m) / sh, (l - m) / sh);
        }
    }
    outside + inside.max(0.0)
}

/// `E[(X_eps(r) - Y_eps(r))^2]`: whole-line versus Dirichlet field at `T_hat`,
/// same noise, for `|r| <= c L_tilde`.
pub fn delta_xy_variance(r: f64, eps: f64, c: f64, p: &KernelParams) -> Result<f64> {
    let a = check_eps(eps)?;
    if !(c > 0.0 && c < 1.0) {
        return domain(format!("interior fraction c must lie in (0, 1), got {c}"));
    }
    let l_tilde = p.l / a.sqrt();
    if r.abs() > c * l_tilde * (1.0 + 1e-12) {
        return domain(format!("r = {r} outside the interior band |r| <= {}", c * l_tilde));
    }
    let x = r * a.sqrt();
    let t_hat = a / 2.0;
    let f = |q: f64| {
        if q == 0.0 {
            return 0.0;
        }
        2.0 * q * (2.0 * q * q - 2.0 * t_hat).exp() * kernel_defect_l2(x, q * q, p)
    };
    Ok(gl16().composite(0.0, t_hat.sqrt(), COV_PANELS, f))
}

/// Upper bound `e^{-L²(1-c)²/T_hat} ∫_0^{T_hat} e^{-2s} / sqrt(π(T_hat - s)) ds`.
pub fn delta_xy_bound(eps: f64, c: f64, l: f64) -> Result<f64> {
    let a = check_eps(eps)?;
    let t_hat = a / 2.0;
    let integral = 2.0 / PI.sqrt() * gl16().composite(0.0, t_hat.sqrt(), COV_PANELS, |q| (2.0 * q * q - 2.0 * t_hat).exp());
    Ok((-l * l * (1.0 - c).powi(2) / t_hat).exp() * integral)
}

/// Where a covariance matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ExactQuadrature,
    Asymptotic,
    Empirical,
}

/// Symmetric covariance matrix on a list of positions.
#[derive(Debug, Clone)]
pub struct CovarianceGrid {
    pub positions: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl CovarianceGrid {
    pub fn from_fn(positions: &[f64], provenance: Provenance, mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<Self> {
        let n = positions.len();
        let mut matrix = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = f(positions[i], positions[j])?;
                matrix[i][j] = v;
                matrix[j][i] = v;
            }
        }
        Ok(Self { positions: positions.to_vec(), matrix, provenance })
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.positions.len();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                m = m.max((self.matrix[i][j] - self.matrix[j][i]).abs());
            }
        }
        m
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.positions.len();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| self.matrix[i][j]);
        m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // Simpson, 1e5 intervals, of 2 e^{2q²}/sqrt(4π) on [0, 1].
    const VZ1: f64 = 1.334000257099642;

    #[test]
    fn whole_line_variance() {
        assert_abs_diff_eq!(variance_z_line(1.0).unwrap(), VZ1, epsilon = 1e-12);
        assert!(variance_z_line(1e-6).unwrap() < 1e-3);
        assert!(variance_z_line(0.0).is_err());
        // ratio = 1 + 1/(4T) + 3/(16T²) + O(T^-3); the 2% band starts near T = 13.5.
        for t in [5.0, 10.0, 20.0, 40.0] {
            let r = variance_z_line(t).unwrap() / variance_z_line_asymptote(t);
            let series = 1.0 + 0.25 / t + 3.0 / (16.0 * t * t);
            assert!((r - series).abs() < 2.0 / t.powi(3), "T = {t}: ratio {r}");
        }
        let r10 = variance_z_line(10.0).unwrap() / variance_z_line_asymptote(10.0);
        assert_abs_diff_eq!(r10, 1.02716357694611, epsilon = 1e-12);
        assert!(variance_z_line(14.0).unwrap() / variance_z_line_asymptote(14.0) < 1.02);
    }

    #[test]
    fn critical_time_solves_definition() {
        for k in [2, 4, 6, 8, 10, 12] {
            let eps = 10f64.powi(-k);
            let t = critical_time(eps).unwrap();
            assert!((eps * variance_z_line(t).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dirichlet_covariance_basics() {
        let p = KernelParams::new(13.8).unwrap();
        assert_eq!(cov_z_eps(13.8, 1.0, 2.0, 3.0, &p).unwrap(), 0.0);
        for t in [1.0, 3.0, 6.9] {
            // The gap is of order e^{-L²/(2t)}, below rounding for t = 1.
            let c = cov_z_eps(0.0, 0.0, t, t, &p).unwrap();
            let v = variance_z_line(t).unwrap();
            assert!(c <= v * (1.0 + 1e-13));
            assert!(c > 0.99 * v);
        }
        let a = cov_z_eps(1.0, -2.0, 2.5, 4.0, &p).unwrap();
        let b = cov_z_eps(-2.0, 1.0, 4.0, 2.5, &p).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12 * a.abs());
    }

    #[test]
    fn covariance_converges_in_panels() {
        let p = KernelParams::new(5.0).unwrap();
        for (x, y, t, s) in [(0.0, 0.0, 3.0, 3.0), (1.0, 2.0, 3.0, 2.9), (4.5, 4.0, 6.0, 1.0)] {
            let a = cov_z_eps_panels(x, y, t, s, &p, 128).unwrap();
            let b = cov_z_eps_panels(x, y, t, s, &p, 512).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-11 * b.abs().max(1.0));
        }
    }

    #[test]
    fn mode_sum_reproduces_covariance() {
        // Σ_n e^{μ_n(t+t')} (1 - e^{-2μ_n min}) / (2μ_n) φ_n(x) φ_n(x'), summed far out.
        let l = 3.0;
        let p = KernelParams::new(l).unwrap();
        let (x, y, t, s): (f64, f64, f64, f64) = (0.4, -1.1, 2.0, 1.5);
        let mut acc = 0.0;
        for n in 1..200_000usize {
            let lam = p.lambda(n);
            let mu = 1.0 - lam;
            let v = (mu * (t - s).abs()).exp() * crate::gaussian::modes::ou_variance(mu, t.min(s));
            let nf = n as f64;
            acc += v * (nf * PI * (x + l) / (2.0 * l)).sin() * (nf * PI * (y + l) / (2.0 * l)).sin() / l;
        }
        let c = cov_z_eps(x, y, t, s, &p).unwrap();
        assert_abs_diff_eq!(c, acc, epsilon = 1e-6);
    }

    #[test]
    fn whole_line_field_is_stationary() {
        let a = cov_z_line(0.3, 1.1, 2.0, 2.5).unwrap();
        let b = cov_z_line(5.3, 6.1, 2.0, 2.5).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10 * a);
        // Matches the Dirichlet field far from the boundary.
        let p = KernelParams::new(30.0).unwrap();
        let c = cov_z_eps(0.3, 1.1, 2.0, 2.5, &p).unwrap();
        assert_abs_diff_eq!(a, c, epsilon = 1e-10 * a);
        assert_abs_diff_eq!(cov_z_line(0.0, 0.0, 2.0, 2.0).unwrap(), variance_z_line(2.0).unwrap(), epsilon = 1e-11);
    }

    #[test]
    fn limit_covariance() {
        assert_eq!(cov_limit_y(0.0), 1.0);
        assert_abs_diff_eq!(cov_limit_y(1.0), (-0.5f64).exp(), epsilon = 1e-16);
    }

    #[test]
    fn x_covariance_asymptotics() {
        for d in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let r = cov_x_exact(0.0, d, 1e-8).unwrap() / cov_x_asymptotic(0.0, d, 1e-8).unwrap();
            assert!((r - 1.0).abs() < 0.10, "Δ = {d}: ratio {r}");
        }
        let mut prev = f64::INFINITY;
        for d in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let v = cov_x_exact(0.3, 0.3 + d, 1e-6).unwrap();
            assert!(v < prev && v >= 0.0);
            prev = v;
        }
        assert!(prev < 1e-6);
        assert!(cov_x_exact(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn laplace_consistency() {
        for d in [0.0, 0.5, 1.0, 1.5] {
            let a = 1e-10f64.ln().abs();
            let r = a * laplace_integral(d, 1e-10).unwrap() / cov_limit_y(d);
            assert!((r - 1.0).abs() < 0.05, "Δ = {d}: ratio {r}");
        }
        // The prefactor links the Laplace integral to the covariance of X_eps.
        let eps: f64 = 1e-6;
        let a = eps.ln().abs();
        let via_u = a.sqrt() / (2.0 * (2.0 * PI).sqrt()) * laplace_integral(0.7, eps).unwrap();
        assert_abs_diff_eq!(via_u, cov_x_exact(0.0, 0.7, eps).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn increments() {
        assert_eq!(increment_var_x(0.0, 0.0, 1e-8).unwrap(), 0.0);
        for h in [0.1, 0.5, 1.0] {
            let r = increment_var_x(0.0, h, 1e-8).unwrap() / increment_var_x_asymptote(h, 1e-8).unwrap();
            assert!((r - 1.0).abs() < 0.10, "h = {h}: ratio {r}");
        }
        let h = 0.8;
        let direct = 2.0 * (cov_x_exact(0.0, 0.0, 1e-6).unwrap() - cov_x_exact(0.0, h, 1e-6).unwrap());
        assert_abs_diff_eq!(increment_var_x(0.0, h, 1e-6).unwrap(), direct, epsilon = 1e-13);
    }

    #[test]
    fn boundary_defect() {
        let eps: f64 = 1e-4;
        let a = eps.ln().abs();
        let p = KernelParams::new(a).unwrap();
        let v0 = delta_xy_variance(0.0, eps, 0.5, &p).unwrap();
        let bound = delta_xy_bound(eps, 0.5, a).unwrap();
        assert!(v0 >= 0.0 && v0 <= bound, "{v0} vs {bound}");
        let edge = 0.5 * a / a.sqrt();
        let v1 = delta_xy_variance(edge, eps, 0.5, &p).unwrap();
        assert!(v1 > v0);
        assert!(delta_xy_variance(0.9 * a.sqrt(), eps, 0.5, &p).is_err());
    }

    #[test]
    fn boundary_defect_matches_frozen_oracle() {
        // Direct adaptive quadrature (20 digits) of ∫ e^{-2s} ∫ (h - h_L 1_{|y|<L})² dy ds,
        // eps = 1e-2, L = |ln eps|, x = 0.5.
        let eps: f64 = 1e-2;
        let a = eps.ln().abs();
        let p = KernelParams::new(a).unwrap();
        let got = delta_xy_variance(0.5 / a.sqrt(), eps, 0.9, &p).unwrap();
        assert_abs_diff_eq!(got, 4.2916432094685996873e-6, epsilon = 1e-17);
    }

    proptest! {
        #[test]
        fn dirichlet_variance_dominated(u in -1.0f64..1.0, t in 0.05f64..8.0) {
            let p = KernelParams::new(6.0).unwrap();
            let c = cov_z_eps(u * 6.0, u * 6.0, t, t, &p).unwrap();
            prop_assert!(c >= 0.0);
            prop_assert!(c <= variance_z_line(t).unwrap() * (1.0 + 1e-12));
        }
    }
}
