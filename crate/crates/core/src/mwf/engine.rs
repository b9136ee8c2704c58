use std::fmt::Write as _;

use num_complex::Complex64;

use super::solve::solve_filter;
use super::stats::{assemble_system, CorrelationState};
use super::{apply_filter, FilterSet, MwfConfig};
use crate::activity::{Activity, ActivityTimeline};
use crate::error::{Error, Result};
use crate::metrics::ComponentSignals;
use crate::room::SourceLabel;
use crate::signal::{MultichannelSignal, RealFft, StftConfig};

/// Frame-by-frame adaptive filter state for one stream.
#[derive(Debug, Clone)]
pub struct MwfEngine {
    cfg: MwfConfig,
    stft: StftConfig,
    deltas: Vec<f64>,
    state: CorrelationState,
    filters: FilterSet,
    solved: bool,
}

impl MwfEngine {
    pub fn new(cfg: &MwfConfig, sample_rate: u32) -> Result<Self> {
        cfg.validate()?;
        let stft = StftConfig::from_frame_ms(cfg.frame_ms, sample_rate)?;
        let bins = stft.num_bins();
        let deltas = (0..bins)
            .map(|k| cfg.delta_schedule.delta_at(stft.bin_frequency(k, sample_rate)))
            .collect();
        Ok(Self {
            cfg: cfg.clone(),
            stft,
            deltas,
            state: CorrelationState::new(bins),
            filters: FilterSet::zeros(bins),
            solved: false,
        })
    }

    pub fn stft(&self) -> &StftConfig {
        &self.stft
    }

    pub fn config(&self) -> &MwfConfig {
        &self.cfg
    }

    pub fn state(&self) -> &CorrelationState {
        &self.state
    }

    pub fn filters(&self) -> &FilterSet {
        &self.filters
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn is_warm(&self) -> bool {
        self.state.all_classes_reach(self.cfg.warmup_frames)
    }

    /// Updates the statistics with `frame` (two channels of one-sided bins)
    /// unless `time` is past the adaptation stop, then re-solves the filters.
    pub fn adapt(&mut self, frame: &[Vec<Complex64>], label: Activity, time: f64) {
        let adapting = self.cfg.adaptation_stop_time.is_none_or(|stop| time < stop);
        let changed = adapting && self.state.update(frame, label, self.cfg.lambda);
        if self.is_warm() && (changed || !self.solved) {
            self.resolve();
        }
    }

    fn resolve(&mut self) {
        for k in 0..self.state.num_bins() {
            let delta = self.deltas[k];
            let (r, pa) = assemble_system(&self.state, k, SourceLabel::Driver);
            let (_, pb) = assemble_system(&self.state, k, SourceLabel::Passenger);
            // Inputs were checked finite; a non-finite statistic can only come
            // from overflow and is muted like a singular bin.
            let zero = [Complex64::new(0.0, 0.0); 2];
            self.filters.w_a[k] = solve_filter(&r, pa, delta).unwrap_or(zero);
            self.filters.w_b[k] = solve_filter(&r, pb, delta).unwrap_or(zero);
        }
        self.solved = true;
    }

    /// `(ŝ_1A, ŝ_2B)` spectra of one frame under the current filters.
    pub fn apply(&self, frame: &[Vec<Complex64>]) -> [Vec<Complex64>; 2] {
        let (x0, x1) = (&frame[0], &frame[1]);
        let a = self
            .filters
            .w_a
            .iter()
            .zip(x0.iter().zip(x1))
            .map(|(w, (p, q))| apply_filter(w, *p, *q))
            .collect();
        let b = self
            .filters
            .w_b
            .iter()
            .zip(x0.iter().zip(x1))
            .map(|(w, (p, q))| apply_filter(w, *p, *q))
            .collect();
        [a, b]
    }
}

/// Clean microphone components of the mixture, each with two channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentInputs {
    pub driver: MultichannelSignal,
    pub passenger: MultichannelSignal,
    pub noise: MultichannelSignal,
}

/// Decomposition of both outputs into the filtered components.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComponents {
    pub s_hat_1a: ComponentSignals,
    pub s_hat_2b: ComponentSignals,
}

impl FilteredComponents {
    pub fn mixed(&self) -> ComponentSignals {
        ComponentSignals::sum(&self.s_hat_1a, &self.s_hat_2b).expect("equal lengths")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub frame: usize,
    pub bin: usize,
    pub w_a_norm: f64,
    pub w_b_norm: f64,
    pub trace_r: f64,
}

pub fn diagnostics_csv(rows: &[DiagnosticRow]) -> String {
    let mut s = String::from("frame,bin,w_a_norm,w_b_norm,trace_r\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.6e},{:.6e},{:.6e}",
            r.frame, r.bin, r.w_a_norm, r.w_b_norm, r.trace_r
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwfOutput {
    pub s_hat_1a: Vec<f64>,
    pub s_hat_2b: Vec<f64>,
    pub mixed: Vec<f64>,
    pub decomposition: Option<FilteredComponents>,
    pub diagnostics: Vec<DiagnosticRow>,
    /// Filters after the last frame.
    pub final_filters: FilterSet,
    /// First frame at which every class had passed warmup.
    pub warm_frame: Option<usize>,
}

/// Windowed analysis of padded streaming frames, one channel at a time.
struct Analyzer<'a> {
    stft: &'a StftConfig,
    fft: &'a RealFft,
    buf: Vec<f64>,
}

impl Analyzer<'_> {
    fn frame(&mut self, padded: &MultichannelSignal, m: usize) -> Vec<Vec<Complex64>> {
        let start = m * self.stft.hop();
        padded
            .channels()
            .iter()
            .map(|c| {
                let seg = &c[start..start + self.stft.frame_len()];
                for (b, (x, w)) in self.buf.iter_mut().zip(seg.iter().zip(self.stft.window())) {
                    *b = x * w;
                }
                self.fft.forward(&self.buf)
            })
            .collect()
    }
}

/// Overlap-add accumulator in padded coordinates.
struct Synth {
    out: Vec<f64>,
}

impl Synth {
    fn new(frames: usize, stft: &StftConfig) -> Self {
        Self {
            out: vec![0.0; (frames - 1) * stft.hop() + stft.fft_len()],
        }
    }

    fn add(&mut self, fft: &RealFft, spectrum: &[Complex64], m: usize, stft: &StftConfig) {
        let block = fft.inverse(spectrum);
        let g = 1.0 / stft.cola_gain();
        let start = m * stft.hop();
        for (o, v) in self.out[start..start + stft.fft_len()].iter_mut().zip(&block) {
            *o += v * g;
        }
    }

    fn finish(self, stft: &StftConfig, len: usize) -> Vec<f64> {
        let off = stft.stream_offset();
        self.out[off..off + len].to_vec()
    }
}

fn check_pair(sig: &MultichannelSignal, len: usize, what: &str) -> Result<()> {
    if sig.num_channels() != 2 {
        return Err(Error::InvalidSignal(format!(
            "{what} must have 2 channels, got {}",
            sig.num_channels()
        )));
    }
    if sig.len() != len {
        return Err(Error::InvalidSignal(format!(
            "{what} has {} samples, expected {len}",
            sig.len()
        )));
    }
    if sig.channels().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("microphone signal"));
    }
    Ok(())
}

/// Runs the adaptive filter over a whole recording. Frame `m` of the
/// timeline is centred on sample `m·hop`; with `components`, the identical
/// time-varying filters are applied to each component as well.
pub fn process_stream(
    mics: &MultichannelSignal,
    timeline: &ActivityTimeline,
    cfg: &MwfConfig,
    components: Option<&ComponentInputs>,
) -> Result<MwfOutput> {
    let n = mics.len();
    check_pair(mics, n, "microphone signal")?;
    if let Some(c) = components {
        check_pair(&c.driver, n, "driver component")?;
        check_pair(&c.passenger, n, "passenger component")?;
        check_pair(&c.noise, n, "noise component")?;
    }
    let mut engine = MwfEngine::new(cfg, mics.sample_rate())?;
    let stft = engine.stft().clone();
    let frames = stft.stream_frame_count(n);
    if timeline.len() != frames {
        return Err(Error::TimelineMismatch {
            timeline: timeline.len(),
            frames,
        });
    }
    if timeline.hop() != stft.hop() {
        return Err(Error::InvalidConfig(format!(
            "timeline hop {} differs from the filter hop {}",
            timeline.hop(),
            stft.hop()
        )));
    }
    let fft = RealFft::new(stft.fft_len());
    let mut analyzer = Analyzer {
        stft: &stft,
        fft: &fft,
        buf: vec![0.0; stft.frame_len()],
    };
    let padded = stft.stream_pad(mics);
    let padded_parts: Vec<MultichannelSignal> = components
        .map(|c| [&c.driver, &c.passenger, &c.noise].map(|s| stft.stream_pad(s)).to_vec())
        .unwrap_or_default();
    // Outputs: [ŝ_1A, ŝ_2B] for the mixture, then per component.
    let mut synth: Vec<[Synth; 2]> = (0..1 + padded_parts.len())
        .map(|_| [Synth::new(frames, &stft), Synth::new(frames, &stft)])
        .collect();
    let mut diagnostics = Vec::new();
    let mut warm_frame = None;
    for m in 0..frames {
        let x = analyzer.frame(&padded, m);
        engine.adapt(&x, timeline.label(m), stft.stream_frame_time(m, mics.sample_rate()));
        if warm_frame.is_none() && engine.is_warm() {
            warm_frame = Some(m);
        }
        for &k in &cfg.diagnostic_bins {
            if k < stft.num_bins() {
                let (r, _) = assemble_system(engine.state(), k, SourceLabel::Driver);
                let norm = |w: &[Complex64; 2]| (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
                diagnostics.push(DiagnosticRow {
                    frame: m,
                    bin: k,
                    w_a_norm: norm(&engine.filters().w_a[k]),
                    w_b_norm: norm(&engine.filters().w_b[k]),
                    trace_r: r.trace(),
                });
            }
        }
        let emit = |slot: &mut [Synth; 2], frame: &[Vec<Complex64>]| {
            let [a, b] = engine.apply(frame);
            slot[0].add(&fft, &a, m, &stft);
            slot[1].add(&fft, &b, m, &stft);
        };
        emit(&mut synth[0], &x);
        for (i, part) in padded_parts.iter().enumerate() {
            let xi = analyzer.frame(part, m);
            emit(&mut synth[1 + i], &xi);
        }
    }
    let mut outs = synth.into_iter().map(|[a, b]| [a.finish(&stft, n), b.finish(&stft, n)]);
    let [s_hat_1a, s_hat_2b] = outs.next().expect("mixture output");
    let decomposition = if components.is_some() {
        let [d, p, v] = [outs.next(), outs.next(), outs.next()].map(|o| o.expect("component output"));
        let [d1, d2] = d;
        let [p1, p2] = p;
        let [v1, v2] = v;
        Some(FilteredComponents {
            s_hat_1a: ComponentSignals::new(d1, p1, v1)?,
            s_hat_2b: ComponentSignals::new(d2, p2, v2)?,
        })
    } else {
        None
    };
    let mixed = s_hat_1a.iter().zip(&s_hat_2b).map(|(a, b)| a + b).collect();
    Ok(MwfOutput {
        s_hat_1a,
        s_hat_2b,
        mixed,
        decomposition,
        diagnostics,
        final_filters: engine.filters().clone(),
        warm_frame,
    })
}
