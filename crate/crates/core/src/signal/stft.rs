use std::f64::consts::PI;

use num_complex::Complex64;

use super::{MultichannelSignal, RealFft};
use crate::error::{Error, Result};

const COLA_TOLERANCE: f64 = 1e-6;

/// Periodic Hann window; sums to exactly one at 50% overlap.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Framing parameters for 50%-overlap analysis and overlap-add synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct StftConfig {
    frame_len: usize,
    hop: usize,
    fft_len: usize,
    window: Vec<f64>,
    cola_gain: f64,
}

impl StftConfig {
    /// Hann-windowed configuration with `hop = frame_len / 2`.
    pub fn new(frame_len: usize, fft_len: usize) -> Result<Self> {
        Self::with_window(frame_len, fft_len, hann_window(frame_len))
    }

    /// Frame length from a duration, transform length rounded up to the next
    /// power of two.
    pub fn from_frame_ms(frame_ms: f64, sample_rate: u32) -> Result<Self> {
        if !(frame_ms > 0.0) || !frame_ms.is_finite() {
            return Err(Error::InvalidStft(format!("frame duration {frame_ms} ms")));
        }
        let mut frame_len = (frame_ms * sample_rate as f64 / 1000.0).round() as usize;
        frame_len += frame_len % 2;
        Self::new(frame_len, frame_len.max(2).next_power_of_two())
    }

    pub fn with_window(frame_len: usize, fft_len: usize, window: Vec<f64>) -> Result<Self> {
        if frame_len < 2 || frame_len % 2 != 0 {
            return Err(Error::InvalidStft(format!(
                "frame length {frame_len} must be even and at least 2"
            )));
        }
        if fft_len < frame_len {
            return Err(Error::InvalidStft(format!(
                "fft length {fft_len} shorter than frame length {frame_len}"
            )));
        }
        if window.len() != frame_len {
            return Err(Error::InvalidStft(format!(
                "window has {} taps, frame length is {frame_len}",
                window.len()
            )));
        }
        let hop = frame_len / 2;
        let sums: Vec<f64> = (0..hop).map(|n| window[n] + window[n + hop]).collect();
        let mean = sums.iter().sum::<f64>() / hop as f64;
        let worst = sums.iter().map(|s| (s - mean).abs()).fold(0.0_f64, f64::max);
        if !(mean > 0.0) || worst > COLA_TOLERANCE * mean {
            return Err(Error::InvalidStft(format!(
                "window is not constant-overlap-add at hop {hop} (relative deviation {:.2e})",
                worst / mean.abs().max(f64::MIN_POSITIVE)
            )));
        }
        Ok(Self {
            frame_len,
            hop,
            fft_len,
            window,
            cola_gain: mean,
        })
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    pub fn num_bins(&self) -> usize {
        self.fft_len / 2 + 1
    }

    /// Overlap-added window sum, divided out at synthesis.
    pub fn cola_gain(&self) -> f64 {
        self.cola_gain
    }

    pub fn bin_frequency(&self, bin: usize, sample_rate: u32) -> f64 {
        bin as f64 * sample_rate as f64 / self.fft_len as f64
    }

    /// Frames produced by [`stft_analyze`] for `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            (len - self.frame_len) / self.hop + 1
        }
    }

    /// Frames needed to cover `len` samples when streaming: the signal is
    /// padded so every input sample is inside two overlapping frames.
    pub fn stream_frame_count(&self, len: usize) -> usize {
        len.div_ceil(self.hop) + 1
    }

    /// Leading zeros inserted by [`StftConfig::stream_pad`].
    pub fn stream_offset(&self) -> usize {
        self.frame_len - self.hop
    }

    /// Zero-pads `signal` for streaming: `stream_offset()` zeros in front and
    /// enough at the end for `stream_frame_count(len)` full frames. Frame `m`
    /// of the padded signal is centred on original sample `m * hop`.
    pub fn stream_pad(&self, signal: &MultichannelSignal) -> MultichannelSignal {
        let frames = self.stream_frame_count(signal.len());
        let padded_len = (frames - 1) * self.hop + self.frame_len;
        let offset = self.stream_offset();
        let channels = signal
            .channels()
            .iter()
            .map(|c| {
                let mut p = vec![0.0; padded_len];
                p[offset..offset + c.len()].copy_from_slice(c);
                p
            })
            .collect();
        MultichannelSignal::new(channels, signal.sample_rate()).expect("shape preserved")
    }

    /// Streaming frame whose centre is nearest to original sample `n`.
    pub fn stream_frame_of_sample(&self, n: usize) -> usize {
        (n + self.hop / 2) / self.hop
    }

    /// Centre time of streaming frame `m`, in seconds from the signal start.
    pub fn stream_frame_time(&self, m: usize, sample_rate: u32) -> f64 {
        (m * self.hop) as f64 / sample_rate as f64
    }
}

/// One analysis frame: a one-sided spectrum per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame {
    pub index: usize,
    pub bins: Vec<Vec<Complex64>>,
}

impl SpectralFrame {
    pub fn num_channels(&self) -> usize {
        self.bins.len()
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            index: self.index,
            bins: self.bins.iter().map(|c| c.iter().map(|z| z * gain).collect()).collect(),
        }
    }
}

/// Windowed, zero-padded transforms of frames `[m·hop, m·hop + frame_len)`.
pub fn stft_analyze(signal: &MultichannelSignal, cfg: &StftConfig) -> Result<Vec<SpectralFrame>> {
    let count = cfg.frame_count(signal.len());
    if count == 0 {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            frame_len: cfg.frame_len,
        });
    }
    let fft = RealFft::new(cfg.fft_len);
    let mut buf = vec![0.0; cfg.frame_len];
    let frames = (0..count)
        .map(|m| {
            let start = m * cfg.hop;
            let bins = signal
                .channels()
                .iter()
                .map(|c| {
                    for (b, (x, w)) in buf
                        .iter_mut()
                        .zip(c[start..start + cfg.frame_len].iter().zip(&cfg.window))
                    {
                        *b = x * w;
                    }
                    fft.forward(&buf)
                })
                .collect();
            SpectralFrame { index: m, bins }
        })
        .collect();
    Ok(frames)
}

/// Overlap-add resynthesis. Output length is `(frames - 1)·hop + fft_len`;
/// samples fully covered by two frames reproduce the analysed input.
pub fn istft_synthesize(frames: &[SpectralFrame], cfg: &StftConfig, sample_rate: u32) -> Result<MultichannelSignal> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InconsistentFrames("no frames to synthesize".into()))?;
    let num_channels = first.num_channels();
    let num_bins = cfg.num_bins();
    for (i, f) in frames.iter().enumerate() {
        if f.num_channels() != num_channels {
            return Err(Error::InconsistentFrames(format!(
                "frame {i} has {} channels, expected {num_channels}",
                f.num_channels()
            )));
        }
        if let Some(c) = f.bins.iter().find(|c| c.len() != num_bins) {
            return Err(Error::InconsistentFrames(format!(
                "frame {i} has {} bins, expected {num_bins}",
                c.len()
            )));
        }
    }
    let fft = RealFft::new(cfg.fft_len);
    let out_len = (frames.len() - 1) * cfg.hop + cfg.fft_len;
    let mut out = vec![vec![0.0; out_len]; num_channels];
    let inv_gain = 1.0 / cfg.cola_gain;
    for (m, frame) in frames.iter().enumerate() {
        let start = m * cfg.hop;
        for (ch, spectrum) in out.iter_mut().zip(&frame.bins) {
            let block = fft.inverse(spectrum);
            for (o, v) in ch[start..start + cfg.fft_len].iter_mut().zip(&block) {
                *o += v * inv_gain;
            }
        }
    }
    MultichannelSignal::new(out, sample_rate)
}
