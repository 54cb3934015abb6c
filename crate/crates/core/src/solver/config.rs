use crate::error::{Error, Result};

/// Cubic part `φ` of the drift `u - φ(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Drift {
    /// `φ(u) = u³`
    Full,
    /// `φ(u) = u³ 1{u >= 0}`, lower comparison process.
    Phi1,
    /// `φ(u) = u³ 1{u <= 0}`, upper comparison process.
    Phi2,
    /// `φ ≡ 0`
    Linear,
}

impl Drift {
    #[inline]
    pub fn phi(self, u: f64) -> f64 {
        match self {
            Drift::Full => u * u * u,
            Drift::Phi1 if u >= 0.0 => u * u * u,
            Drift::Phi2 if u <= 0.0 => u * u * u,
            _ => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Drift::Full => "full",
            Drift::Phi1 => "phi1",
            Drift::Phi2 => "phi2",
            Drift::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Exact sine-basis update of the linear part, explicit cubic, exact-variance noise.
    SemiImplicitSpectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dx: f64,
    pub dt: f64,
    pub drift: Drift,
    pub scheme: Scheme,
    pub seed: u64,
    pub snapshot_times: Vec<f64>,
}

impl SolverConfig {
    /// Grid with an even number `M` of intervals on `[-L, L]` and spacing at most `dx_target`.
    pub fn grid(l: f64, dx_target: f64) -> (usize, f64) {
        let m = 2 * ((l / dx_target - 1e-9).ceil() as usize).max(1);
        (m, 2.0 * l / m as f64)
    }

    /// Configuration on `[-L, L]` with spacing at most `dx_target` and `dt = min(dx², dt_cap)`.
    pub fn for_length(l: f64, dx_target: f64, dt_cap: f64, drift: Drift, seed: u64) -> Self {
        let (_, dx) = Self::grid(l, dx_target);
        Self { dx, dt: (dx * dx).min(dt_cap), drift, scheme: Scheme::SemiImplicitSpectral, seed, snapshot_times: vec![] }
    }

    /// Single-run default: `dx ≈ L/1024`, `dt = min(dx², 1e-3)`.
    pub fn default_for(l: f64, seed: u64) -> Self {
        Self::for_length(l, l / 1024.0, 1e-3, Drift::Full, seed)
    }

    /// Resolution used by the Monte Carlo experiments: `dx ≈ 0.1`, `dt = min(dx², 0.01)`.
    pub fn experiment(l: f64, seed: u64) -> Self {
        Self::for_length(l, 0.1, 0.01, Drift::Full, seed)
    }

    pub fn with_drift(mut self, drift: Drift) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn n_points(&self, l: f64) -> usize {
        (2.0 * l / self.dx).round() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0 && self.dt > 0.0) {
            return Err(Error::Config(format!("dx and dt must be positive (dx = {}, dt = {})", self.dx, self.dt)));
        }
        if self.dt > self.dx * self.dx * (1.0 + 1e-12) {
            return Err(Error::Config(format!("dt = {} exceeds dx² = {}", self.dt, self.dx * self.dx)));
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::Config("snapshot times must be finite and nonnegative".into()));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Config("snapshot times must be non-decreasing".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_variants() {
        assert_eq!(Drift::Full.phi(-2.0), -8.0);
        assert_eq!(Drift::Phi1.phi(-2.0), 0.0);
        assert_eq!(Drift::Phi1.phi(2.0), 8.0);
        assert_eq!(Drift::Phi2.phi(2.0), 0.0);
        assert_eq!(Drift::Phi2.phi(-2.0), -8.0);
        assert_eq!(Drift::Linear.phi(3.0), 0.0);
    }

    #[test]
    fn grids_and_validation() {
        let c = SolverConfig::experiment(13.815510557964274, 0);
        let n = c.n_points(13.815510557964274);
        assert_eq!(n % 2, 1);
        assert!(c.dx <= 0.1 && c.dt <= c.dx * c.dx);
        c.validate().unwrap();
        let mut bad = c.clone();
        bad.dt = 1.0;
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let d = SolverConfig::default_for(13.8, 0);
        assert_eq!(d.n_points(13.8), 2049);
    }
}
