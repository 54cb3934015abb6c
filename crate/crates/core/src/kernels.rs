//! Heat kernels for the generator ½∂²/∂x².
//!
//! On the whole line `h(x, y, t) = exp(-(x-y)²/(2t)) / sqrt(2πt)`. On `[-L, L]`
//! with Dirichlet conditions two series are available: the image (reflection)
//! series, which converges fastest for small `t`, and the sine eigenfunction
//! series with eigenvalues `λ_n = π²n²/(8L²)`, fastest for large `t`.
//! [`KernelParams::dirichlet`] switches at `t = L²`.

use crate::error::{domain, Result};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Truncation target for the dropped tail of either series.
pub const TAIL_TOL: f64 = 1e-14;

/// Smallest time accepted by the eigenfunction series.
pub const DEFAULT_T_FLOOR: f64 = 1e-6;

/// Heat kernel on the whole line.
pub fn heat_kernel_line(x: f64, y: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("heat kernel needs t > 0, got {t}"));
    }
    Ok(gauss(x - y, t))
}

/// Centered Gaussian density with variance `t`.
#[inline]
pub(crate) fn gauss(d: f64, t: f64) -> f64 {
    (-(d * d) / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// `P(a < N(0,1) < b)` without cancellation in either tail.
pub fn normal_mass(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let c = FRAC_1_SQRT_2;
    if a >= 0.0 {
        0.5 * (libm::erfc(a * c) - libm::erfc(b * c))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b * c) - libm::erfc(-a * c))
    } else {
        1.0 - 0.5 * libm::erfc(-a * c) - 0.5 * libm::erfc(b * c)
    }
}

/// Parameters of the Dirichlet kernel on `[-L, L]`.
///
/// `j_max` and `n_max` override the adaptive truncation when set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub l: f64,
    pub j_max: Option<usize>,
    pub n_max: Option<usize>,
    pub t_floor: f64,
}

impl KernelParams {
    pub fn new(l: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite()) {
            return domain(format!("half-length L must be positive, got {l}"));
        }
        Ok(Self { l, j_max: None, n_max: None, t_floor: DEFAULT_T_FLOOR })
    }

    pub fn with_truncation(mut self, j_max: usize, n_max: usize) -> Result<Self> {
        if j_max == 0 || n_max == 0 {
            return domain("truncation indices must be at least 1");
        }
        self.j_max = Some(j_max);
        self.n_max = Some(n_max);
        Ok(self)
    }

    /// Eigenvalue of mode `n` of `-½∂²` with Dirichlet conditions on `[-L, L]`.
    pub fn lambda(&self, n: usize) -> f64 {
        let nf = n as f64;
        PI * PI * nf * nf / (8.0 * self.l * self.l)
    }

    /// Image-series index bound from the Gaussian tail.
    pub fn reflection_terms(&self, t: f64) -> usize {
        if let Some(j) = self.j_max {
            return j;
        }
        let arg = 8.0 / (TAIL_TOL * (2.0 * PI * t).sqrt());
        if arg <= 1.0 {
            return 1;
        }
        let d = (2.0 * t * arg.ln()).sqrt();
        ((d / (4.0 * self.l)).ceil() as usize).max(1)
    }

    /// Eigenfunction-series length from the geometric tail bound.
    pub fn spectral_terms(&self, t: f64) -> usize {
        if let Some(n) = self.n_max {
            return n;
        }
        let a = PI * PI / (8.0 * self.l * self.l);
        let scale = 1.0 / self.l.min(1.0);
        let tail = |n: f64| scale * (-t * a * (n + 1.0).powi(2)).exp() / (-(-t * a * (2.0 * n + 3.0)).exp_m1());
        // Start from the Gaussian estimate and walk to the first certified N.
        let mut n = ((TAIL_TOL.ln().abs() / (t * a)).sqrt() * 0.9).floor().max(1.0);
        while n > 1.0 && tail(n - 1.0) < TAIL_TOL {
            n -= 1.0;
        }
        while tail(n) >= TAIL_TOL {
            n += 1.0;
        }
        n as usize
    }

    fn check_point(&self, x: f64) -> Result<f64> {
        let slack = 1e-12 * self.l.max(1.0);
        if !(x.abs() <= self.l + slack) {
            return domain(format!("position {x} outside [-{l}, {l}]", l = self.l));
        }
        Ok(x.clamp(-self.l, self.l))
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return domain(format!("kernel time must be positive and finite, got {t}"));
        }
        Ok(())
    }

    /// Image series for the Dirichlet kernel.
    pub fn dirichlet_reflection(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let x = self.check_point(x)?;
        let y = self.check_point(y)?;
        self.check_time(t)?;
        Ok(self.reflection_unchecked(x, y, t))
    }

    pub(crate) fn reflection_unchecked(&self, x: f64, y: f64, t: f64) -> f64 {
        if x.abs() == self.l || y.abs() == self.l {
            return 0.0;
        }
        let l = self.l;
        let jm = self.reflection_terms(t) as i64;
        let mut acc = 0.0;
        for j in -jm..=jm {
            let s = 4.0 * j as f64 * l;
            let d1 = x - y - s;
            let d2 = x + y - s - 2.0 * l;
            acc += (-(d1 * d1) / (2.0 * t)).exp() - (-(d2 * d2) / (2.0 * t)).exp();
        }
        (acc / (2.0 * PI * t).sqrt()).max(0.0)
    }

    /// Eigenfunction series for the Dirichlet kernel.
    pub fn dirichlet_spectral(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let x = self.check_point(x)?;
        let y = self.check_point(y)?;
        self.check_time(t)?;
        if t < self.t_floor {
            return domain(format!("eigenfunction series needs t >= {} (the configured floor), got {t}", self.t_floor));
        }
        Ok(self.spectral_unchecked(x, y, t))
    }

    pub(crate) fn spectral_unchecked(&self, x: f64, y: f64, t: f64) -> f64 {
        let l = self.l;
        let n_terms = self.spectral_terms(t);
        let a = PI * PI / (8.0 * l * l);
        let tx = PI * (x + l) / (2.0 * l);
        let ty = PI * (y + l) / (2.0 * l);
        let mut acc = 0.0;
        for n in 1..=n_terms {
            let nf = n as f64;
            acc += (-t * a * nf * nf).exp() * (nf * tx).sin() * (nf * ty).sin();
        }
        acc / l
    }

    /// Dirichlet kernel, picking the faster series.
    pub fn dirichlet(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let x = self.check_point(x)?;
        let y = self.check_point(y)?;
        self.check_time(t)?;
        Ok(self.dirichlet_unchecked(x, y, t))
    }

    #[inline]
    pub(crate) fn dirichlet_unchecked(&self, x: f64, y: f64, t: f64) -> f64 {
        if t <= self.l * self.l {
            self.reflection_unchecked(x, y, t)
        } else {
            self.spectral_unchecked(x, y, t)
        }
    }

    /// `P_x(Brownian motion started at x has not left [-L, L] by time t)`.
    pub fn survival_mass(&self, x: f64, t: f64) -> Result<f64> {
        let x = self.check_point(x)?;
        self.check_time(t)?;
        if x.abs() == self.l {
            return Ok(0.0);
        }
        let m = if t <= self.l * self.l { self.survival_reflection(x, t) } else { self.survival_spectral(x, t) };
        Ok(m.clamp(0.0, 1.0))
    }

    pub(crate) fn survival_reflection(&self, x: f64, t: f64) -> f64 {
        let l = self.l;
        let st = t.sqrt();
        let jm = self.reflection_terms(t) as i64;
        let mut acc = 0.0;
        for j in -jm..=jm {
            let s = 4.0 * j as f64 * l;
            acc += normal_mass((-l - x + s) / st, (l - x + s) / st);
            acc -= normal_mass((x - 3.0 * l - s) / st, (x - l - s) / st);
        }
        acc
    }

    pub(crate) fn survival_spectral(&self, x: f64, t: f64) -> f64 {
        let l = self.l;
        let n_terms = self.spectral_terms(t);
        let a = PI * PI / (8.0 * l * l);
        let th = PI * (x + l) / (2.0 * l);
        let mut acc = 0.0;
        for n in (1..=n_terms).step_by(2) {
            let nf = n as f64;
            acc += 4.0 / (nf * PI) * (-t * a * nf * nf).exp() * (nf * th).sin();
        }
        acc
    }
}
