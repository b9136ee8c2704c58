//! Frame-level speaker activity: which class each STFT frame updates.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::room::SourceLabel;
use crate::signal::{MultichannelSignal, RealFft, StftConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activity {
    Silence,
    DriverOnly,
    PassengerOnly,
    Both,
}

impl Activity {
    pub fn from_flags(driver: bool, passenger: bool) -> Self {
        match (driver, passenger) {
            (false, false) => Activity::Silence,
            (true, false) => Activity::DriverOnly,
            (false, true) => Activity::PassengerOnly,
            (true, true) => Activity::Both,
        }
    }

    pub fn is_active(self, source: SourceLabel) -> bool {
        match source {
            SourceLabel::Driver => matches!(self, Activity::DriverOnly | Activity::Both),
            SourceLabel::Passenger => matches!(self, Activity::PassengerOnly | Activity::Both),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activity::Silence => "silence",
            Activity::DriverOnly => "driver",
            Activity::PassengerOnly => "passenger",
            Activity::Both => "both",
        }
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One label per streaming STFT frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityTimeline {
    labels: Vec<Activity>,
    hop: usize,
}

impl ActivityTimeline {
    pub fn new(labels: Vec<Activity>, hop: usize) -> Result<Self> {
        if hop == 0 {
            return Err(Error::InvalidStft("timeline hop must be positive".into()));
        }
        Ok(Self { labels, hop })
    }

    pub fn labels(&self) -> &[Activity] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn label(&self, frame: usize) -> Activity {
        self.labels[frame]
    }

    /// Label of the frame nearest to sample `n` (frames past the end repeat
    /// the last label).
    pub fn label_at_sample(&self, n: usize) -> Activity {
        let m = (n + self.hop / 2) / self.hop;
        self.labels[m.min(self.labels.len() - 1)]
    }

    /// Per-sample activity of `source` over `len` samples.
    pub fn sample_mask(&self, source: SourceLabel, len: usize) -> Vec<bool> {
        if self.labels.is_empty() {
            return vec![false; len];
        }
        (0..len).map(|n| self.label_at_sample(n).is_active(source)).collect()
    }

    pub fn count(&self, label: Activity) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }

    /// Fraction of frames where `self` and `other` agree, restricted to frames
    /// whose label in `other` satisfies `keep`.
    pub fn agreement(&self, other: &Self, keep: impl Fn(Activity) -> bool) -> f64 {
        let (mut hit, mut n) = (0usize, 0usize);
        for (a, b) in self.labels.iter().zip(&other.labels) {
            if keep(*b) {
                n += 1;
                hit += usize::from(a == b);
            }
        }
        if n == 0 {
            1.0
        } else {
            hit as f64 / n as f64
        }
    }

    pub fn to_csv(&self, sample_rate: u32) -> String {
        let mut s = String::from("frame,time_s,label\n");
        for (m, l) in self.labels.iter().enumerate() {
            let t = (m * self.hop) as f64 / sample_rate as f64;
            let _ = writeln!(s, "{m},{t:.6},{l}");
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>, sample_rate: u32) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv(sample_rate)).map_err(|e| Error::io(path, e))
    }
}

/// Energy of each streaming frame window, per channel.
fn frame_energies(signal: &[f64], cfg: &StftConfig) -> Vec<f64> {
    let frames = cfg.stream_frame_count(signal.len());
    let offset = cfg.stream_offset() as isize;
    (0..frames)
        .map(|m| {
            let start = (m * cfg.hop()) as isize - offset;
            let lo = start.max(0) as usize;
            let hi = ((start + cfg.frame_len() as isize).max(0) as usize).min(signal.len());
            signal.get(lo..hi).map_or(0.0, |s| s.iter().map(|v| v * v).sum())
        })
        .collect()
}

/// Labels from the clean per-source signals: a source is active in a frame
/// when its frame energy is within `floor_db` (negative) of its peak frame.
///
/// `sources` holds one channel per source, driver first.
pub fn oracle_timeline(sources: &MultichannelSignal, cfg: &StftConfig, floor_db: f64) -> Result<ActivityTimeline> {
    if sources.num_channels() != 2 {
        return Err(Error::InvalidSignal(format!(
            "oracle needs driver and passenger channels, got {}",
            sources.num_channels()
        )));
    }
    let flags: Vec<Vec<bool>> = sources
        .channels()
        .iter()
        .map(|c| {
            let e = frame_energies(c, cfg);
            let peak = e.iter().cloned().fold(0.0, f64::max);
            let threshold = peak * 10f64.powf(floor_db / 10.0);
            e.iter().map(|v| peak > 0.0 && *v > threshold).collect()
        })
        .collect();
    let labels = flags[0]
        .iter()
        .zip(&flags[1])
        .map(|(&d, &p)| Activity::from_flags(d, p))
        .collect();
    ActivityTimeline::new(labels, cfg.hop())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Forgetting factor of the per-microphone power smoother.
    pub smoothing: f64,
    /// Band in which frame power is measured, Hz.
    pub band_hz: (f64, f64),
    /// Level by which the near microphone must exceed the far one.
    pub dominance_db: f64,
    /// Level above the tracked noise floor that counts as speech.
    pub speech_margin_db: f64,
    /// Rate at which the noise-floor estimate may rise, dB per second.
    pub floor_rise_db_per_s: f64,
    /// A new label is accepted after this many consecutive frames.
    pub hold_frames: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            smoothing: 0.9,
            band_hz: (200.0, 4000.0),
            dominance_db: 0.0,
            speech_margin_db: 3.0,
            floor_rise_db_per_s: 3.0,
            hold_frames: 2,
        }
    }
}

/// Labels from the two microphone signals alone, by comparing smoothed
/// band powers with each other and with a tracked noise floor. Frames with
/// speech where neither microphone dominates are labelled [`Activity::Both`],
/// which freezes adaptation.
pub fn power_detector(mics: &MultichannelSignal, cfg: &StftConfig, det: &DetectorConfig) -> Result<ActivityTimeline> {
    if mics.num_channels() != 2 {
        return Err(Error::InvalidSignal(format!(
            "detector needs two microphones, got {}",
            mics.num_channels()
        )));
    }
    if !(0.0..1.0).contains(&det.smoothing) {
        return Err(Error::InvalidConfig(format!(
            "detector smoothing {} must lie in [0, 1)",
            det.smoothing
        )));
    }
    let rate = mics.sample_rate() as f64;
    let padded = cfg.stream_pad(mics);
    let frames = cfg.stream_frame_count(mics.len());
    let fft = RealFft::new(cfg.fft_len());
    let lo = (det.band_hz.0 * cfg.fft_len() as f64 / rate).ceil() as usize;
    let hi = ((det.band_hz.1 * cfg.fft_len() as f64 / rate).floor() as usize).min(cfg.num_bins() - 1);
    if lo > hi {
        return Err(Error::InvalidConfig(format!(
            "detector band {:?} Hz contains no bins",
            det.band_hz
        )));
    }
    let rise = 10f64.powf(det.floor_rise_db_per_s * cfg.hop() as f64 / rate / 10.0);
    let dominance = 10f64.powf(det.dominance_db / 10.0);
    let speech = 10f64.powf(det.speech_margin_db / 10.0);

    let mut buf = vec![0.0; cfg.frame_len()];
    let mut smoothed = [0.0f64; 2];
    let mut floor = [f64::INFINITY; 2];
    let mut labels = Vec::with_capacity(frames);
    let mut current = Activity::Silence;
    let mut candidate = Activity::Silence;
    let mut run = 0usize;
    for m in 0..frames {
        let start = m * cfg.hop();
        for ch in 0..2 {
            let x = &padded.channel(ch)[start..start + cfg.frame_len()];
            for (b, (v, w)) in buf.iter_mut().zip(x.iter().zip(cfg.window())) {
                *b = v * w;
            }
            let p: f64 = fft.forward(&buf)[lo..=hi].iter().map(|z| z.norm_sqr()).sum();
            let s = &mut smoothed[ch];
            *s = if m == 0 {
                p
            } else {
                det.smoothing * *s + (1.0 - det.smoothing) * p
            };
            floor[ch] = if floor[ch].is_finite() {
                (floor[ch] * rise).min(*s)
            } else {
                *s
            };
        }
        // Power above each microphone's own floor: at low SNR the raw levels
        // are dominated by the equal noise at both microphones.
        let excess = [0, 1].map(|ch| (smoothed[ch] - floor[ch]).max(0.0));
        let noise = floor[0] + floor[1];
        let raw = if excess[0] + excess[1] <= (speech - 1.0) * noise || smoothed[0] + smoothed[1] == 0.0 {
            Activity::Silence
        } else if excess[0] > excess[1] * dominance {
            Activity::DriverOnly
        } else if excess[1] > excess[0] * dominance {
            Activity::PassengerOnly
        } else {
            Activity::Both
        };
        if raw == current {
            run = 0;
        } else {
            if raw == candidate {
                run += 1;
            } else {
                candidate = raw;
                run = 1;
            }
            if run >= det.hold_frames.max(1) {
                current = raw;
                run = 0;
            }
        }
        labels.push(current);
    }
    ActivityTimeline::new(labels, cfg.hop())
}
