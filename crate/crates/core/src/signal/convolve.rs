use super::{MultichannelSignal, RealFft};
use crate::error::{Error, Result};

/// Full linear convolution via a zero-padded FFT; output length
/// `x.len() + h.len() - 1`.
pub fn convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let out_len = x.len() + h.len() - 1;
    // Direct form is faster and exact for tiny kernels.
    if h.len().min(x.len()) <= 8 {
        return direct_convolve(x, h);
    }
    let fft = RealFft::new(out_len.next_power_of_two());
    let xf = fft.forward(x);
    let hf = fft.forward(h);
    let prod: Vec<_> = xf.iter().zip(&hf).map(|(a, b)| a * b).collect();
    let mut y = fft.inverse(&prod);
    y.truncate(out_len);
    y
}

/// O(n·m) time-domain convolution.
pub fn direct_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut y = vec![0.0; x.len() + h.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        for (j, &hj) in h.iter().enumerate() {
            y[i + j] += xi * hj;
        }
    }
    y
}

/// Convolves every channel of `signal` with `impulse_response`.
pub fn fft_convolve(signal: &MultichannelSignal, impulse_response: &[f64]) -> Result<MultichannelSignal> {
    if signal.is_empty() {
        return Err(Error::InvalidSignal("cannot convolve an empty signal".into()));
    }
    if impulse_response.is_empty() {
        return Err(Error::InvalidSignal("impulse response is empty".into()));
    }
    let channels = signal
        .channels()
        .iter()
        .map(|c| convolve(c, impulse_response))
        .collect();
    MultichannelSignal::new(channels, signal.sample_rate())
}
