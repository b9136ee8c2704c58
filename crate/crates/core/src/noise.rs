//! Spatially uncorrelated coloured background noise and input-SNR calibration.
//!
//! Colours are produced by weighting the spectrum of Gaussian white noise and
//! transforming back, which gives exact control over the envelope. Each
//! channel draws from its own ChaCha stream of the [`NoiseSpec`] seed.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::signal::{MultichannelSignal, RealFft};

/// Below this frequency the 1/f and 1/f^2 shapes are held constant.
pub const SHAPING_FLOOR_HZ: f64 = 20.0;

const HOTH_TABLE: &str = include_str!("../data/hoth.tsv");
const GREEN_TABLE: &str = include_str!("../data/green.tsv");

/// Relative spectral level (dB) against frequency, linearly interpolated on a
/// log-frequency axis and held flat beyond the end points.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTable {
    points: Vec<(f64, f64)>,
}

impl EnvelopeTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EnvelopeTable {
                line: 0,
                detail: "table has no points".into(),
            });
        }
        for (i, &(f, db)) in points.iter().enumerate() {
            if !(f > 0.0) || !f.is_finite() || !db.is_finite() {
                return Err(Error::EnvelopeTable {
                    line: i + 1,
                    detail: format!("point ({f}, {db}) must have a positive frequency and finite level"),
                });
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::EnvelopeTable {
                line: i + 2,
                detail: "frequencies must increase strictly".into(),
            });
        }
        Ok(Self { points })
    }

    /// Two whitespace-separated columns, Hz and dB. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let bad = |detail: String| Error::EnvelopeTable { line: i + 1, detail };
            if cols.len() != 2 {
                return Err(bad(format!("expected 2 columns, found {}", cols.len())));
            }
            let f: f64 = cols[0]
                .parse()
                .map_err(|_| bad(format!("bad frequency {:?}", cols[0])))?;
            let db: f64 = cols[1].parse().map_err(|_| bad(format!("bad level {:?}", cols[1])))?;
            points.push((f, db));
        }
        Self::new(points)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn level_db(&self, freq: f64) -> f64 {
        let pts = &self.points;
        let (f0, d0) = pts[0];
        if freq <= f0 {
            return d0;
        }
        let (fl, dl) = pts[pts.len() - 1];
        if freq >= fl {
            return dl;
        }
        let i = pts.partition_point(|&(f, _)| f <= freq);
        let (fa, da) = pts[i - 1];
        let (fb, db) = pts[i];
        let t = (freq / fa).ln() / (fb / fa).ln();
        da + t * (db - da)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseColor {
    White,
    /// Power falling as 1/f (-3 dB per octave).
    Pink,
    /// Power falling as 1/f^2 (-6 dB per octave).
    Red,
    Green(EnvelopeTable),
    Hoth(EnvelopeTable),
}

impl NoiseColor {
    pub fn green() -> Self {
        NoiseColor::Green(EnvelopeTable::parse(GREEN_TABLE).expect("bundled green table"))
    }

    pub fn hoth() -> Self {
        NoiseColor::Hoth(EnvelopeTable::parse(HOTH_TABLE).expect("bundled Hoth table"))
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "white" => Some(NoiseColor::White),
            "pink" => Some(NoiseColor::Pink),
            "red" | "brown" => Some(NoiseColor::Red),
            "green" => Some(Self::green()),
            "hoth" => Some(Self::hoth()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseColor::White => "white",
            NoiseColor::Pink => "pink",
            NoiseColor::Red => "red",
            NoiseColor::Green(_) => "green",
            NoiseColor::Hoth(_) => "hoth",
        }
    }

    /// Relative power spectral density at `freq` (linear scale).
    pub fn relative_psd(&self, freq: f64) -> f64 {
        let f = freq.max(SHAPING_FLOOR_HZ);
        match self {
            NoiseColor::White => 1.0,
            NoiseColor::Pink => 1.0 / f,
            NoiseColor::Red => 1.0 / (f * f),
            NoiseColor::Green(t) | NoiseColor::Hoth(t) => 10f64.powf(t.level_db(freq) / 10.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub color: NoiseColor,
    pub seed: u64,
    /// Number of mutually independent streams.
    pub channels: usize,
}

/// Unit-RMS coloured noise, one independent stream per channel.
pub fn generate_noise(spec: &NoiseSpec, length_samples: usize, sample_rate: u32) -> Result<MultichannelSignal> {
    if length_samples == 0 {
        return Err(Error::InvalidNoise("length must be positive".into()));
    }
    if spec.channels == 0 {
        return Err(Error::InvalidNoise("at least one channel is required".into()));
    }
    if sample_rate == 0 {
        return Err(Error::InvalidNoise("sample rate must be positive".into()));
    }
    let fft_len = length_samples.next_power_of_two();
    let fft = RealFft::new(fft_len);
    let weights: Vec<f64> = (0..fft.num_bins())
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                spec.color
                    .relative_psd(k as f64 * sample_rate as f64 / fft_len as f64)
                    .sqrt()
            }
        })
        .collect();
    let channels = (0..spec.channels)
        .map(|ch| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(ch as u64);
            let white: Vec<f64> = (0..fft_len).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut x = if spec.color == NoiseColor::White {
                white
            } else {
                let shaped: Vec<_> = fft.forward(&white).iter().zip(&weights).map(|(z, w)| z * w).collect();
                fft.inverse(&shaped)
            };
            x.truncate(length_samples);
            let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
            if rms > 0.0 {
                x.iter_mut().for_each(|v| *v /= rms);
            }
            x
        })
        .collect();
    MultichannelSignal::new(channels, sample_rate)
}

/// Segments of one source's speech at one microphone used for calibration.
#[derive(Debug, Clone, Copy)]
pub struct SnrReference<'a> {
    pub source: usize,
    pub mic: usize,
    /// Per-sample activity of `source`.
    pub mask: &'a [bool],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledNoise {
    pub noise: MultichannelSignal,
    /// Amplitude factor applied to the input noise.
    pub scale: f64,
}

/// Scales `noise` so that speech power over the references' active samples,
/// divided by the noise power over the same samples, equals `target_input_snr_db`.
/// With several references the powers are averaged across them.
pub fn mix_at_snr(
    speech_components: &[MultichannelSignal],
    noise: &MultichannelSignal,
    target_input_snr_db: f64,
    references: &[SnrReference<'_>],
) -> Result<ScaledNoise> {
    if references.is_empty() {
        return Err(Error::NoActiveSegments("input-SNR calibration"));
    }
    let mut speech_power = 0.0;
    let mut noise_power = 0.0;
    for r in references {
        let speech = speech_components
            .get(r.source)
            .ok_or_else(|| Error::InvalidNoise(format!("no speech component for source {}", r.source)))?;
        if r.mic >= speech.num_channels() || r.mic >= noise.num_channels() {
            return Err(Error::InvalidNoise(format!("no channel for microphone {}", r.mic)));
        }
        let s = speech.channel(r.mic);
        let v = noise.channel(r.mic);
        if r.mask.len() != s.len() || v.len() != s.len() {
            return Err(Error::InvalidNoise("mask, speech and noise lengths differ".into()));
        }
        let (mut ps, mut pv, mut count) = (0.0, 0.0, 0usize);
        for ((&m, a), b) in r.mask.iter().zip(s).zip(v) {
            if m {
                ps += a * a;
                pv += b * b;
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::NoActiveSegments("input-SNR calibration"));
        }
        speech_power += ps / count as f64;
        noise_power += pv / count as f64;
    }
    if speech_power <= 0.0 {
        return Err(Error::ZeroSpeechPower);
    }
    if noise_power <= 0.0 {
        return Err(Error::ZeroPower("noise"));
    }
    let scale = (speech_power / (noise_power * 10f64.powf(target_input_snr_db / 10.0))).sqrt();
    Ok(ScaledNoise {
        noise: noise.scaled(scale),
        scale,
    })
}
