//! Adaptive two-microphone Wiener filtering with per-source extraction.
//!
//! Per frequency bin, second-order statistics are tracked separately for
//! noise-only, driver-only and passenger-only frames. Subtracting the noise
//! statistics yields the speech correlation matrix and the cross-correlation
//! with each talker's own-microphone component, from which a regularized 2×2
//! Wiener solve gives one filter per talker.

mod engine;
mod solve;
mod stats;

pub use engine::{
    diagnostics_csv, process_stream, ComponentInputs, DiagnosticRow, FilteredComponents, MwfEngine, MwfOutput,
};
pub use solve::{solve_filter, SINGULAR_TOLERANCE, TRACE_FLOOR};
pub use stats::{assemble_system, CorrelationState, Hermitian2, StatClass};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Step-function regularization over frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSchedule {
    /// `(max_frequency_hz, delta)` in increasing frequency; a bin at
    /// frequency `f` takes the first band with `f < max_frequency_hz`.
    /// Frequencies above the last band use its δ.
    bands: Vec<(f64, f64)>,
}

impl DeltaSchedule {
    pub fn new(bands: Vec<(f64, f64)>) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidConfig("delta_schedule needs at least one band".into()));
        }
        for (i, &(f, d)) in bands.iter().enumerate() {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "delta_schedule[{i}].delta = {d} must be finite and >= 0"
                )));
            }
            if !(f > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "delta_schedule[{i}].max_frequency = {f} must be positive"
                )));
            }
        }
        if let Some(i) = bands.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidConfig(format!(
                "delta_schedule[{}].max_frequency must exceed the previous band",
                i + 1
            )));
        }
        Ok(Self { bands })
    }

    pub fn uniform(delta: f64) -> Self {
        Self {
            bands: vec![(f64::INFINITY, delta)],
        }
    }

    /// Heavier loading below 312.5 Hz for low-frequency-dominated noise.
    pub fn hoth_preset() -> Self {
        Self {
            bands: vec![(312.5, 100.0), (f64::INFINITY, 1.0)],
        }
    }

    pub fn bands(&self) -> &[(f64, f64)] {
        &self.bands
    }

    pub fn delta_at(&self, freq: f64) -> f64 {
        self.bands
            .iter()
            .find(|(f, _)| freq < *f)
            .unwrap_or_else(|| self.bands.last().expect("non-empty"))
            .1
    }
}

impl Default for DeltaSchedule {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwfConfig {
    pub frame_ms: f64,
    pub lambda: f64,
    pub delta_schedule: DeltaSchedule,
    /// Frames each class must see before the filters leave the muted state.
    pub warmup_frames: usize,
    /// Statistics stop updating at frames centred at or after this time.
    pub adaptation_stop_time: Option<f64>,
    /// Bins whose filter norms are recorded every frame.
    pub diagnostic_bins: Vec<usize>,
}

impl Default for MwfConfig {
    fn default() -> Self {
        Self {
            frame_ms: 8.0,
            lambda: 0.96,
            delta_schedule: DeltaSchedule::default(),
            warmup_frames: 10,
            adaptation_stop_time: None,
            diagnostic_bins: Vec::new(),
        }
    }
}

impl MwfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_ms > 0.0) || !self.frame_ms.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "frame_ms = {} must be positive",
                self.frame_ms
            )));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda = {} must lie in (0, 1)",
                self.lambda
            )));
        }
        if let Some(t) = self.adaptation_stop_time {
            if t.is_nan() {
                return Err(Error::InvalidConfig("adaptation_stop_time is NaN".into()));
            }
        }
        Ok(())
    }
}

/// One filter vector per bin for each talker.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSet {
    pub w_a: Vec<[Complex64; 2]>,
    pub w_b: Vec<[Complex64; 2]>,
}

impl FilterSet {
    pub fn zeros(num_bins: usize) -> Self {
        let z = [Complex64::new(0.0, 0.0); 2];
        Self {
            w_a: vec![z; num_bins],
            w_b: vec![z; num_bins],
        }
    }

    pub fn num_bins(&self) -> usize {
        self.w_a.len()
    }

    pub fn is_zero(&self) -> bool {
        self.w_a
            .iter()
            .chain(&self.w_b)
            .all(|w| w[0].norm_sqr() + w[1].norm_sqr() == 0.0)
    }
}

/// `w^H x` for a two-channel bin.
#[inline]
pub fn apply_filter(w: &[Complex64; 2], x0: Complex64, x1: Complex64) -> Complex64 {
    w[0].conj() * x0 + w[1].conj() * x1
}
