//! Sample-domain and spectral-domain plumbing: WAV I/O, windowed framing with
//! overlap-add resynthesis, and FFT-based linear convolution.

mod convolve;
mod fft;
mod stft;
mod wav;

pub use convolve::{convolve, direct_convolve, fft_convolve};
pub use fft::RealFft;
pub use stft::{hann_window, istft_synthesize, stft_analyze, SpectralFrame, StftConfig};
pub use wav::{load_wav, save_wav, WavEncoding, WriteSummary};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

/// Audio held as one sample vector per channel, all of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelSignal {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl MultichannelSignal {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSignal("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(Error::InvalidSignal("at least one channel is required".into()));
        }
        let len = channels[0].len();
        if let Some((i, c)) = channels.iter().enumerate().find(|(_, c)| c.len() != len) {
            return Err(Error::InvalidSignal(format!(
                "channel {i} has {} samples, channel 0 has {len}",
                c.len()
            )));
        }
        Ok(Self { channels, sample_rate })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn zeros(num_channels: usize, len: usize, sample_rate: u32) -> Result<Self> {
        Self::new(vec![vec![0.0; len]; num_channels], sample_rate)
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|x| x * gain).collect())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Sample-wise sum of two signals with identical shape.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.num_channels() != other.num_channels()
            || self.len() != other.len()
            || self.sample_rate != other.sample_rate
        {
            return Err(Error::InvalidSignal(format!(
                "cannot add {}x{} @ {} Hz to {}x{} @ {} Hz",
                self.num_channels(),
                self.len(),
                self.sample_rate,
                other.num_channels(),
                other.len(),
                other.sample_rate
            )));
        }
        let channels = self
            .channels
            .iter()
            .zip(&other.channels)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self {
            channels,
            sample_rate: self.sample_rate,
        })
    }

    /// Sum of all channels as a mono signal.
    pub fn channel_sum(&self) -> Self {
        let mut out = vec![0.0; self.len()];
        for c in &self.channels {
            for (o, x) in out.iter_mut().zip(c) {
                *o += x;
            }
        }
        Self {
            channels: vec![out],
            sample_rate: self.sample_rate,
        }
    }

    /// Copy of samples `[start, end)` of every channel.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        let end = end.min(self.len());
        let start = start.min(end);
        Self {
            channels: self.channels.iter().map(|c| c[start..end].to_vec()).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Mean square of a sample sequence; zero for an empty slice.
pub fn mean_power(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64
}

pub fn energy(samples: &[f64]) -> f64 {
    samples.iter().map(|x| x * x).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_channels() {
        let err = MultichannelSignal::new(vec![vec![0.0; 4], vec![0.0; 3]], 16_000);
        assert!(matches!(err, Err(Error::InvalidSignal(_))));
    }

    #[test]
    fn rejects_zero_rate() {
        assert!(MultichannelSignal::mono(vec![0.0], 0).is_err());
    }

    #[test]
    fn channel_sum_adds_samples() {
        let s = MultichannelSignal::new(vec![vec![1.0, 2.0], vec![0.5, -2.0]], 8000).unwrap();
        assert_eq!(s.channel_sum().channel(0), &[1.5, 0.0]);
    }
}
