use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse transform pair for real signals of a fixed length,
/// exposing the one-sided spectrum (`len / 2 + 1` bins).
#[derive(Clone)]
pub struct RealFft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for RealFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RealFft").field("len", &self.len).finish()
    }
}

impl RealFft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_bins(&self) -> usize {
        self.len / 2 + 1
    }

    /// One-sided spectrum of `input`, zero-padded (or truncated) to the
    /// transform length.
    pub fn forward(&self, input: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = (0..self.len)
            .map(|i| Complex64::new(input.get(i).copied().unwrap_or(0.0), 0.0))
            .collect();
        self.forward.process(&mut buf);
        buf.truncate(self.num_bins());
        buf[0].im = 0.0;
        if self.len % 2 == 0 {
            let last = self.len / 2;
            buf[last].im = 0.0;
        }
        buf
    }

    /// Real signal from a one-sided spectrum. The negative-frequency half is
    /// rebuilt by Hermitian mirroring and the DC/Nyquist imaginary parts are
    /// discarded, so the result is real by construction. Scaled by `1/len`.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        assert_eq!(spectrum.len(), self.num_bins(), "spectrum length mismatch");
        let n = self.len;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[0] = Complex64::new(spectrum[0].re, 0.0);
        for k in 1..self.num_bins() {
            buf[k] = spectrum[k];
        }
        if n % 2 == 0 {
            buf[n / 2] = Complex64::new(spectrum[n / 2].re, 0.0);
        }
        for k in 1..n.div_ceil(2) {
            buf[n - k] = buf[k].conj();
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}
