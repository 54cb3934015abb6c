use crate::error::{domain, Result};

/// Values of a function on a uniform grid `x_min + i dx`, `i = 0..n`, at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub x_min: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    /// Zero field on `[-L, L]` with `n_points` nodes including both endpoints.
    pub fn zeros(l: f64, n_points: usize) -> Self {
        assert!(n_points >= 2, "a field needs at least two nodes");
        Self { x_min: -l, dx: 2.0 * l / (n_points - 1) as f64, values: vec![0.0; n_points], time: 0.0 }
    }

    /// Field on `[-L, L]` sampled from `f`.
    pub fn from_fn(l: f64, n_points: usize, f: impl Fn(f64) -> f64) -> Self {
        let mut out = Self::zeros(l, n_points);
        for i in 0..n_points {
            out.values[i] = f(out.x(i));
        }
        out
    }

    /// Dirichlet field on `[-L, L]`: `f` sampled inside, endpoints forced to zero.
    pub fn dirichlet_from_fn(l: f64, n_points: usize, f: impl Fn(f64) -> f64) -> Self {
        let mut out = Self::from_fn(l, n_points, f);
        out.values[0] = 0.0;
        out.values[n_points - 1] = 0.0;
        out
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    /// Number of grid intervals.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.dx * (self.values.len() - 1) as f64
    }

    /// `L` for a centered grid.
    pub fn half_length(&self) -> f64 {
        0.5 * self.dx * (self.values.len() - 1) as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.x(i)).collect()
    }

    pub fn endpoints_zero(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.values.len() - 1] == 0.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup of `|self - other|` over nodes with `|x| <= radius`.
    pub fn sup_diff_within(&self, other: &Field, radius: f64) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "fields on different grids");
        (0..self.values.len())
            .filter(|&i| self.x(i).abs() <= radius + 1e-12)
            .map(|i| (self.values[i] - other.values[i]).abs())
            .fold(0.0, f64::max)
    }

    /// Index of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let s = ((x - self.x_min) / self.dx).round();
        (s.max(0.0) as usize).min(self.values.len() - 1)
    }

    /// Require a Dirichlet field on a centered grid.
    pub fn check_dirichlet(&self) -> Result<()> {
        if !self.endpoints_zero() {
            return domain("field must vanish at both endpoints");
        }
        if (self.x_min + self.half_length()).abs() > 1e-9 * self.half_length().max(1.0) {
            return domain("field grid must be centered on 0");
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return domain("field has non-finite values");
        }
        Ok(())
    }
}

/// Values on a periodic grid `x_min + j dx`, `j = 0..n`, period `n dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    pub x_min: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    pub time: f64,
}

impl PeriodicField {
    pub fn period(&self) -> f64 {
        self.dx * self.values.len() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    /// Values on the nodes of `[-L, L]`, the first `M + 1` nodes when `x_min = -L`.
    pub fn restrict(&self, n_points: usize) -> Field {
        Field { x_min: self.x_min, dx: self.dx, values: self.values[..n_points].to_vec(), time: self.time }
    }
}

/// Smooth plateau `a tanh((L - |x|)/w)` on `[-L, L]`; zero at the endpoints.
pub fn plateau(l: f64, n_points: usize, a: f64, w: f64) -> Field {
    Field::dirichlet_from_fn(l, n_points, |x| a * ((l - x.abs()) / w).tanh())
}
