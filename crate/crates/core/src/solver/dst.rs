//! Type-I discrete sine transform and periodic FFT wrappers over rustfft.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// `y_k = Σ_{j=1}^{M-1} x_j sin(π j k / M)`, `k = 1..M-1`.
///
/// Computed from one complex FFT of length `2M` of the odd extension. Applying
/// the transform twice multiplies by `M/2`.
#[derive(Clone)]
pub struct SineTransform {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform").field("m", &self.m).finish()
    }
}

impl SineTransform {
    /// Transform for a grid with `m` intervals (`m - 1` interior nodes).
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "sine transform needs at least two intervals");
        let fft = FftPlanner::new().plan_fft_forward(2 * m);
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Self { m, fft, buf: vec![Complex64::new(0.0, 0.0); 2 * m], scratch }
    }

    pub fn intervals(&self) -> usize {
        self.m
    }

    /// In-place transform of `data[1..m]`; `data[0]` and `data[m]` are ignored and left at 0.
    pub fn forward(&mut self, data: &mut [f64]) {
        let m = self.m;
        debug_assert_eq!(data.len(), m + 1);
        self.load(data, None);
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        data[0] = 0.0;
        data[m] = 0.0;
        for k in 1..m {
            data[k] = -0.5 * self.buf[k].im;
        }
    }

    /// Transform two sequences with one FFT.
    pub fn forward_pair(&mut self, a: &mut [f64], b: &mut [f64]) {
        let m = self.m;
        self.load(a, Some(b));
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        a[0] = 0.0;
        a[m] = 0.0;
        b[0] = 0.0;
        b[m] = 0.0;
        for k in 1..m {
            a[k] = -0.5 * self.buf[k].im;
            b[k] = 0.5 * self.buf[k].re;
        }
    }

    fn load(&mut self, a: &[f64], b: Option<&[f64]>) {
        let m = self.m;
        self.buf[0] = Complex64::new(0.0, 0.0);
        self.buf[m] = Complex64::new(0.0, 0.0);
        for j in 1..m {
            let im = b.map_or(0.0, |b| b[j]);
            self.buf[j] = Complex64::new(a[j], im);
            self.buf[2 * m - j] = Complex64::new(-a[j], -im);
        }
    }
}

/// Forward/inverse complex FFT of fixed length for periodic fields.
#[derive(Clone)]
pub struct PeriodicTransform {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl PeriodicTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self { n, fwd, inv, scratch: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.fwd.process_with_scratch(buf, &mut self.scratch);
    }

    /// Inverse transform including the `1/n` normalization.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inv.process_with_scratch(buf, &mut self.scratch);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }
}
