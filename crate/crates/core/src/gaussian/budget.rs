//! Sup-norm budget for `Z_eps` on `[-L, L] × [0, T]`: Borell tail with the
//! variance bound `K e^{2T}/sqrt(T)` and the Dudley expectation bound
//! `K e^T T^{-1/4} ln(L T^{5/2})`.

use crate::error::{domain, Result};
use crate::gaussian::covariance::variance_z_line;
use crate::quadrature::gl16;

/// Generic constants of the bounds; reported with every budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetConstants {
    pub k_sigma: f64,
    pub k_dudley: f64,
    pub k_entropy: f64,
}

impl Default for BudgetConstants {
    fn default() -> Self {
        Self { k_sigma: 1.0, k_dudley: 1.0, k_entropy: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNormBudget {
    pub l: f64,
    pub t: f64,
    pub sigma_bar_sq: f64,
    /// `sup_t E[Z^2]` from the whole-line variance, which dominates the interval field.
    pub sigma_bar_sq_exact: f64,
    pub esup_bound: f64,
    /// Numerical value of `∫_0^{σ̄} sqrt(ln N(δ)) dδ` with `N = K L T e^{6T}/δ^6`.
    pub entropy_integral: f64,
    /// Threshold for `sqrt(eps) |Z_eps|`.
    pub threshold: f64,
    /// The same threshold for `|Z_eps|`.
    pub threshold_z: f64,
    pub tail_prob_bound: f64,
    pub constants: BudgetConstants,
}

/// Budget at horizon `T = |ln eps|/(2 + rho)`.
pub fn sup_norm_budget(eps: f64, rho: f64, l: f64, k: BudgetConstants) -> Result<SupNormBudget> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("eps must lie in (0, 1), got {eps}"));
    }
    if !(rho >= 0.0) {
        return domain(format!("rho must be nonnegative, got {rho}"));
    }
    if !(l > 0.0) {
        return domain(format!("L must be positive, got {l}"));
    }
    let a = eps.ln().abs();
    let t = a / (2.0 + rho);
    let sigma_bar_sq = k.k_sigma * (2.0 * t).exp() / t.sqrt();
    let esup_bound = k.k_dudley * t.exp() / t.powf(0.25) * (l * t.powf(2.5)).ln();
    let threshold = eps.powf(0.5 - 1.0 / (2.0 + rho)) * a.ln().powi(2) / a.powf(0.25);
    let threshold_z = threshold / eps.sqrt();
    let tail = if threshold_z > esup_bound {
        (4.0 * (-0.5 * (threshold_z - esup_bound).powi(2) / sigma_bar_sq).exp()).max(f64::MIN_POSITIVE)
    } else {
        4.0
    };
    Ok(SupNormBudget {
        l,
        t,
        sigma_bar_sq,
        sigma_bar_sq_exact: variance_z_line(t)?,
        esup_bound,
        entropy_integral: entropy_integral(sigma_bar_sq.sqrt(), k.k_entropy * l * t * (6.0 * t).exp()),
        threshold,
        threshold_z,
        tail_prob_bound: tail,
        constants: k,
    })
}

/// `∫_0^{σ} sqrt(max(0, ln(c/δ^6))) dδ`.
fn entropy_integral(sigma: f64, c: f64) -> f64 {
    let top = sigma.min(c.powf(1.0 / 6.0));
    // δ = top w², which tames the logarithmic endpoint.
    gl16().composite(0.0, 1.0, 64, |w| {
        if w == 0.0 {
            return 0.0;
        }
        let d = top * w * w;
        2.0 * top * w * (c.ln() - 6.0 * d.ln()).max(0.0).sqrt()
    })
}
