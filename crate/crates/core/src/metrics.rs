//! Objective measures: segmental SNR and SIR gains, Welch long-term spectra
//! and comb-filter notch detection.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::activity::ActivityTimeline;
use crate::error::{Error, Result};
use crate::room::SourceLabel;
use crate::signal::{hann_window, RealFft};

/// Largest SIR gain reported when the output interference vanishes.
pub const SIR_GAIN_CAP_DB: f64 = 60.0;

/// One observed channel split into its additive parts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComponentSignals {
    pub driver: Vec<f64>,
    pub passenger: Vec<f64>,
    pub noise: Vec<f64>,
}

impl ComponentSignals {
    pub fn new(driver: Vec<f64>, passenger: Vec<f64>, noise: Vec<f64>) -> Result<Self> {
        if driver.len() != passenger.len() || driver.len() != noise.len() {
            return Err(Error::InvalidSignal(format!(
                "component lengths differ: {}, {}, {}",
                driver.len(),
                passenger.len(),
                noise.len()
            )));
        }
        Ok(Self {
            driver,
            passenger,
            noise,
        })
    }

    pub fn len(&self) -> usize {
        self.driver.len()
    }

    pub fn is_empty(&self) -> bool {
        self.driver.is_empty()
    }

    pub fn source(&self, label: SourceLabel) -> &[f64] {
        match label {
            SourceLabel::Driver => &self.driver,
            SourceLabel::Passenger => &self.passenger,
        }
    }

    /// Element-wise sum, the decomposition of `a + b`.
    pub fn sum(a: &Self, b: &Self) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidSignal(
                "cannot add decompositions of different lengths".into(),
            ));
        }
        let add = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p + q).collect();
        Ok(Self {
            driver: add(&a.driver, &b.driver),
            passenger: add(&a.passenger, &b.passenger),
            noise: add(&a.noise, &b.noise),
        })
    }

    pub fn mixture(&self) -> Vec<f64> {
        self.driver
            .iter()
            .zip(&self.passenger)
            .zip(&self.noise)
            .map(|((a, b), c)| a + b + c)
            .collect()
    }
}

fn masked_power(x: &[f64], mask: &[bool]) -> Result<f64> {
    if x.len() != mask.len() {
        return Err(Error::InvalidSignal(format!(
            "signal has {} samples but mask has {}",
            x.len(),
            mask.len()
        )));
    }
    let (mut acc, mut n) = (0.0, 0usize);
    for (v, &m) in x.iter().zip(mask) {
        if m {
            acc += v * v;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoActiveSegments("metric segment"));
    }
    Ok(acc / n as f64)
}

fn other(label: SourceLabel) -> SourceLabel {
    match label {
        SourceLabel::Driver => SourceLabel::Passenger,
        SourceLabel::Passenger => SourceLabel::Driver,
    }
}

/// SNR improvement in dB for `target`, both SNRs measured over `target_mask`.
pub fn snr_gain(
    input: &ComponentSignals,
    output: &ComponentSignals,
    target: SourceLabel,
    target_mask: &[bool],
) -> Result<f64> {
    let snr = |c: &ComponentSignals| -> Result<f64> {
        let s = masked_power(c.source(target), target_mask)?;
        let v = masked_power(&c.noise, target_mask)?;
        if v <= 0.0 {
            return Err(Error::ZeroPower("noise"));
        }
        if s <= 0.0 {
            return Err(Error::ZeroPower("target speech"));
        }
        Ok(10.0 * (s / v).log10())
    };
    Ok(snr(output)? - snr(input)?)
}

/// SIR improvement in dB for `target`. Target power is taken over
/// `target_mask`, interferer power over `interferer_mask`. Capped at
/// [`SIR_GAIN_CAP_DB`].
pub fn sir_gain(
    input: &ComponentSignals,
    output: &ComponentSignals,
    target: SourceLabel,
    target_mask: &[bool],
    interferer_mask: &[bool],
) -> Result<f64> {
    let powers = |c: &ComponentSignals| -> Result<(f64, f64)> {
        Ok((
            masked_power(c.source(target), target_mask)?,
            masked_power(c.source(other(target)), interferer_mask)?,
        ))
    };
    let (s_in, i_in) = powers(input)?;
    let (s_out, i_out) = powers(output)?;
    if i_in <= 0.0 {
        return Err(Error::ZeroPower("input interference"));
    }
    if s_in <= 0.0 || s_out <= 0.0 {
        return Err(Error::ZeroPower("target speech"));
    }
    if i_out <= 0.0 {
        return Ok(SIR_GAIN_CAP_DB);
    }
    let gain = 10.0 * ((s_out / i_out) / (s_in / i_in)).log10();
    Ok(gain.min(SIR_GAIN_CAP_DB))
}

/// Gains for one processed condition.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub label: String,
    pub snr_gain_driver_db: f64,
    pub snr_gain_passenger_db: f64,
    pub sir_gain_driver_db: f64,
    pub sir_gain_passenger_db: f64,
}

/// Signals entering a [`MetricsReport`]. Each source is scored against its
/// own reference and output pair.
#[derive(Debug, Clone, Copy)]
pub struct EvaluationInputs<'a> {
    /// Reference input for the driver and passenger.
    pub reference: [&'a ComponentSignals; 2],
    /// Output used for SNR, per source.
    pub snr_output: [&'a ComponentSignals; 2],
    /// Output used for SIR, per source.
    pub sir_output: [&'a ComponentSignals; 2],
}

impl MetricsReport {
    pub fn evaluate(
        label: impl Into<String>,
        inputs: EvaluationInputs<'_>,
        timeline: &ActivityTimeline,
    ) -> Result<Self> {
        let n = inputs.reference[0].len();
        let masks = [
            timeline.sample_mask(SourceLabel::Driver, n),
            timeline.sample_mask(SourceLabel::Passenger, n),
        ];
        let labels = [SourceLabel::Driver, SourceLabel::Passenger];
        let mut snr = [0.0; 2];
        let mut sir = [0.0; 2];
        for i in 0..2 {
            snr[i] = snr_gain(inputs.reference[i], inputs.snr_output[i], labels[i], &masks[i])?;
            sir[i] = sir_gain(
                inputs.reference[i],
                inputs.sir_output[i],
                labels[i],
                &masks[i],
                &masks[1 - i],
            )?;
        }
        Ok(Self {
            label: label.into(),
            snr_gain_driver_db: snr[0],
            snr_gain_passenger_db: snr[1],
            sir_gain_driver_db: sir[0],
            sir_gain_passenger_db: sir[1],
        })
    }

    pub fn csv_header() -> &'static str {
        "label,snr_gain_driver_db,snr_gain_passenger_db,sir_gain_driver_db,sir_gain_passenger_db"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.4},{:.4},{:.4},{:.4}",
            self.label,
            self.snr_gain_driver_db,
            self.snr_gain_passenger_db,
            self.sir_gain_driver_db,
            self.sir_gain_passenger_db
        )
    }
}

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub hop: usize,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            segment_len: 4096,
            hop: 2048,
        }
    }
}

/// One-sided power spectral density in dB re 1/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub db: Vec<f64>,
}

impl Psd {
    pub fn bin_width(&self) -> f64 {
        self.freqs.get(1).copied().unwrap_or(0.0) - self.freqs[0]
    }

    pub fn nearest_bin(&self, freq: f64) -> usize {
        let k = (freq / self.bin_width()).round().max(0.0) as usize;
        k.min(self.freqs.len() - 1)
    }

    /// Two tab-separated columns, frequency and level.
    pub fn to_dat(&self) -> String {
        let mut s = String::from("# frequency_hz\tlevel_db\n");
        for (f, d) in self.freqs.iter().zip(&self.db) {
            let _ = writeln!(s, "{f:.4}\t{d:.4}");
        }
        s
    }

    pub fn write_dat(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_dat()).map_err(|e| Error::io(path, e))
    }
}

fn welch_check(len: usize, sample_rate: u32, cfg: &WelchConfig) -> Result<()> {
    if cfg.segment_len < 2 || cfg.hop == 0 || cfg.hop > cfg.segment_len {
        return Err(Error::InvalidSignal(format!(
            "invalid Welch segment {} with hop {}",
            cfg.segment_len, cfg.hop
        )));
    }
    let min = (sample_rate as usize).max(cfg.segment_len);
    if len < min {
        return Err(Error::TooShortForSpectrum { len, min });
    }
    Ok(())
}

/// Averaged cross-periodogram of `x` and `y` (unscaled).
fn welch_cross(x: &[f64], y: &[f64], cfg: &WelchConfig) -> Vec<Complex64> {
    let window = hann_window(cfg.segment_len);
    let fft = RealFft::new(cfg.segment_len);
    let mut acc = vec![Complex64::new(0.0, 0.0); fft.num_bins()];
    let mut buf = vec![0.0; cfg.segment_len];
    let segments = (x.len() - cfg.segment_len) / cfg.hop + 1;
    for s in 0..segments {
        let start = s * cfg.hop;
        let mut spectrum = |sig: &[f64]| {
            for (b, (v, w)) in buf.iter_mut().zip(sig[start..].iter().zip(&window)) {
                *b = v * w;
            }
            fft.forward(&buf)
        };
        let fx = spectrum(x);
        let fy = if std::ptr::eq(x, y) { fx.clone() } else { spectrum(y) };
        for (a, (p, q)) in acc.iter_mut().zip(fx.iter().zip(&fy)) {
            *a += p * q.conj();
        }
    }
    acc.iter_mut().for_each(|a| *a /= segments as f64);
    acc
}

/// Welch PSD, Hann segments, one-sided and normalised to power per Hz.
pub fn long_term_spectrum(x: &[f64], sample_rate: u32, cfg: &WelchConfig) -> Result<Psd> {
    welch_check(x.len(), sample_rate, cfg)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("spectrum input"));
    }
    let raw = welch_cross(x, x, cfg);
    let window = hann_window(cfg.segment_len);
    let norm = sample_rate as f64 * window.iter().map(|w| w * w).sum::<f64>();
    let last = raw.len() - 1;
    let db = raw
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let one_sided = if k == 0 || k == last { 1.0 } else { 2.0 };
            10.0 * (one_sided * p.re / norm).max(1e-300).log10()
        })
        .collect();
    let freqs = (0..raw.len())
        .map(|k| k as f64 * sample_rate as f64 / cfg.segment_len as f64)
        .collect();
    Ok(Psd { freqs, db })
}

/// Magnitude-squared coherence per Welch bin.
pub fn magnitude_squared_coherence(x: &[f64], y: &[f64], sample_rate: u32, cfg: &WelchConfig) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::InvalidSignal("coherence inputs differ in length".into()));
    }
    welch_check(x.len(), sample_rate, cfg)?;
    let sxx = welch_cross(x, x, cfg);
    let syy = welch_cross(y, y, cfg);
    let sxy = welch_cross(x, y, cfg);
    Ok(sxy
        .iter()
        .zip(sxx.iter().zip(&syy))
        .map(|(c, (a, b))| {
            let d = a.re * b.re;
            if d > 0.0 {
                c.norm_sqr() / d
            } else {
                0.0
            }
        })
        .collect())
}

/// Notch-detection settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotchConfig {
    /// Width of the running-median envelope, in octaves.
    pub envelope_octaves: f64,
    /// Half-width in bins of the power average applied before searching.
    pub detail_half_width: usize,
    /// A minimum must be the lowest point within this many bins.
    pub min_separation: usize,
    /// Half-width in bins of the quadratic fit that refines the location.
    pub fit_half_width: usize,
    pub min_depth_db: f64,
}

impl Default for NotchConfig {
    fn default() -> Self {
        Self {
            envelope_octaves: 1.0 / 3.0,
            detail_half_width: 2,
            min_separation: 8,
            fit_half_width: 6,
            min_depth_db: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Notch {
    pub frequency: f64,
    pub depth_db: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Running median of the dB spectrum over a window of `octaves` centred on
/// each bin (log-frequency). DC is left at its own value.
pub fn spectral_envelope(psd: &Psd, octaves: f64) -> Vec<f64> {
    let half = 2f64.powf(octaves / 2.0);
    let mut scratch = Vec::new();
    psd.freqs
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            if k == 0 {
                return psd.db[0];
            }
            let lo = psd.freqs.partition_point(|&g| g < f / half).max(1);
            let hi = psd.freqs.partition_point(|&g| g <= f * half);
            scratch.clear();
            scratch.extend_from_slice(&psd.db[lo..hi]);
            median(&mut scratch)
        })
        .collect()
}

/// Spectrum averaged in power over `±half_width` bins, returned in dB.
fn detail_spectrum(psd: &Psd, half_width: usize) -> Vec<f64> {
    let lin: Vec<f64> = psd.db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
    (0..lin.len())
        .map(|k| {
            let lo = k.saturating_sub(half_width);
            let hi = (k + half_width + 1).min(lin.len());
            let mean = lin[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            10.0 * mean.max(1e-300).log10()
        })
        .collect()
}

/// Vertex of a least-squares parabola through `(x, y)`, if it is a minimum.
fn quadratic_vertex(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let x0 = xs.iter().sum::<f64>() / n;
    let mut s = [0.0f64; 7];
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x - x0;
        s[0] += 1.0;
        s[1] += u;
        s[2] += u * u;
        s[3] += u * u * u;
        s[4] += u * u * u * u;
        s[5] += y * u;
        s[6] += y * u * u;
    }
    let sy: f64 = ys.iter().sum();
    // Normal equations for y = a u^2 + b u + c.
    let m = [[s[4], s[3], s[2]], [s[3], s[2], s[1]], [s[2], s[1], s[0]]];
    let r = [s[6], s[5], sy];
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&m);
    if d.abs() < 1e-300 {
        return None;
    }
    let col = |j: usize| {
        let mut t = m;
        for i in 0..3 {
            t[i][j] = r[i];
        }
        det3(&t) / d
    };
    let (a, b) = (col(0), col(1));
    if a <= 0.0 {
        return None;
    }
    Some(x0 - b / (2.0 * a))
}

/// Local minima lying at least `min_depth_db` under the running-median
/// envelope, sorted by frequency.
pub fn notch_depths(psd: &Psd, cfg: &NotchConfig) -> Vec<Notch> {
    let env = spectral_envelope(psd, cfg.envelope_octaves);
    let detail = detail_spectrum(psd, cfg.detail_half_width);
    let n = detail.len();
    let mut out = Vec::new();
    for k in 1..n.saturating_sub(1) {
        let lo = k.saturating_sub(cfg.min_separation).max(1);
        let hi = (k + cfg.min_separation + 1).min(n);
        let is_min = (lo..hi).all(|j| detail[j] > detail[k] || (detail[j] == detail[k] && j >= k));
        if !is_min {
            continue;
        }
        let depth = env[k] - detail[k];
        if depth < cfg.min_depth_db {
            continue;
        }
        let flo = k.saturating_sub(cfg.fit_half_width).max(1);
        let fhi = (k + cfg.fit_half_width + 1).min(n);
        let frequency = quadratic_vertex(&psd.freqs[flo..fhi], &detail[flo..fhi])
            .filter(|f| *f >= psd.freqs[flo] && *f <= psd.freqs[fhi - 1])
            .unwrap_or(psd.freqs[k]);
        out.push(Notch {
            frequency,
            depth_db: depth,
        });
    }
    out
}

/// Depth under the envelope of the lowest point within `search_hz` of
/// `frequency`. Never negative.
pub fn notch_depth_at(psd: &Psd, frequency: f64, search_hz: f64, cfg: &NotchConfig) -> f64 {
    let env = spectral_envelope(psd, cfg.envelope_octaves);
    let detail = detail_spectrum(psd, cfg.detail_half_width);
    let lo = psd.freqs.partition_point(|&f| f < frequency - search_hz).max(1);
    let hi = psd
        .freqs
        .partition_point(|&f| f <= frequency + search_hz)
        .max(lo + 1)
        .min(detail.len());
    let k = (lo..hi)
        .min_by(|&a, &b| detail[a].total_cmp(&detail[b]))
        .unwrap_or(psd.nearest_bin(frequency));
    (env[k] - detail[k]).max(0.0)
}

/// Nulls of `1 + g·exp(-jωτ)` below `max_frequency`: odd multiples of 1/(2τ).
pub fn comb_null_frequencies(delay_s: f64, max_frequency: f64) -> Vec<f64> {
    if !(delay_s > 0.0) {
        return Vec::new();
    }
    (0..)
        .map(|m| (2 * m + 1) as f64 / (2.0 * delay_s))
        .take_while(|&f| f < max_frequency)
        .collect()
}
