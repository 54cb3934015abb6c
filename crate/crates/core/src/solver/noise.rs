//! Discrete space-time white noise: per step, i.i.d. `N(0, dt/dx)` per interior node.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

/// Reproducible noise source addressed by step index.
///
/// Step `k` draws its increments from ChaCha stream `2k` and its Brownian-bridge
/// refinements from stream `2k + 1`, so any arm can regenerate any step.
#[derive(Debug, Clone)]
pub struct NoisePanel {
    pub seed: u64,
    pub cells: usize,
    pub dt: f64,
    pub dx: f64,
    base: ChaCha8Rng,
}

impl NoisePanel {
    pub fn new(seed: u64, cells: usize, dt: f64, dx: f64) -> Self {
        Self { seed, cells, dt, dx, base: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut r = self.base.clone();
        r.set_stream(id);
        r.set_word_pos(0);
        r
    }

    /// Increments of step `k` (variance `dt/dx` each) into `out[1..=cells]`.
    pub fn increments(&self, k: u64, out: &mut [f64]) {
        let mut r = self.stream(2 * k);
        let s = (self.dt / self.dx).sqrt();
        for v in out[1..=self.cells].iter_mut() {
            *v = s * r.sample::<f64, _>(StandardNormal);
        }
    }

    /// Partial increment over `[t_k, t_k + h]` given the full step increment `xi`.
    pub fn bridge(&self, k: u64, h: f64, xi: &[f64], out: &mut [f64]) {
        let mut r = self.stream(2 * k + 1);
        let frac = h / self.dt;
        let s = (h * (self.dt - h).max(0.0) / (self.dt * self.dx)).sqrt();
        for i in 1..=self.cells {
            out[i] = frac * xi[i] + s * r.sample::<f64, _>(StandardNormal);
        }
    }

    /// Hash of everything that determines the panel.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update((self.cells as u64).to_le_bytes());
        h.update(self.dt.to_bits().to_le_bytes());
        h.update(self.dx.to_bits().to_le_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Running digest of the noise values an arm actually consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NoiseDigest(pub u64);

impl NoiseDigest {
    pub fn absorb(&mut self, xs: &[f64]) {
        for x in xs {
            self.0 = crate::rng::mix64(self.0 ^ x.to_bits());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn increments_are_reproducible_and_scaled() {
        let p = NoisePanel::new(7, 1000, 0.01, 0.1);
        let mut a = vec![0.0; 1002];
        let mut b = vec![0.0; 1002];
        p.increments(3, &mut a);
        p.increments(3, &mut b);
        assert_eq!(a, b);
        p.increments(4, &mut b);
        assert_ne!(a, b);
        assert_eq!(a[0], 0.0);
        assert_eq!(a[1001], 0.0);
        let var = a[1..=1000].iter().map(|x| x * x).sum::<f64>() / 1000.0;
        assert!((var / 0.1 - 1.0).abs() < 0.15);
        assert_eq!(p.fingerprint(), NoisePanel::new(7, 1000, 0.01, 0.1).fingerprint());
        assert_ne!(p.fingerprint(), NoisePanel::new(8, 1000, 0.01, 0.1).fingerprint());
    }

    #[test]
    fn bridge_endpoints() {
        let p = NoisePanel::new(1, 10, 0.01, 0.1);
        let mut xi = vec![0.0; 12];
        p.increments(0, &mut xi);
        let mut out = vec![0.0; 12];
        p.bridge(0, 0.01, &xi, &mut out);
        for i in 1..=10 {
            assert!((out[i] - xi[i]).abs() < 1e-15);
        }
        p.bridge(0, 0.0, &xi, &mut out);
        assert!(out[1..=10].iter().all(|&v| v == 0.0));
    }
}
