//! Closed-form solution of `w' = w - w³`.

use crate::error::{domain, Result};

/// `w(t; a) = sgn(a) / sqrt(1 + e^{-2t}(1/a² - 1))`.
pub fn ode_w(t: f64, a: f64) -> Result<f64> {
    if a == 0.0 || !(a.abs() <= 1.0) {
        return domain(format!("initial value must satisfy 0 < |a| <= 1, got {a}"));
    }
    Ok(a.signum() / (1.0 + (-2.0 * t).exp() * (1.0 / (a * a) - 1.0)).sqrt())
}

/// Time at which `w(·; a)` reaches `1 - rho`; zero when `a >= 1 - rho` already.
pub fn time_to_level(a: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return domain(format!("closeness rho must lie in (0, 1), got {rho}"));
    }
    if !(a > 0.0) {
        return domain(format!("initial value must be positive, got {a}"));
    }
    if a >= 1.0 - rho {
        return Ok(0.0);
    }
    let target = (1.0 - rho).powi(-2) - 1.0;
    let start = a.powi(-2) - 1.0;
    Ok(-0.5 * (target / start).ln())
}
