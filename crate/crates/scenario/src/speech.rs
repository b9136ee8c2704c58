//! Built-in talker material: a small formant synthesizer producing two
//! deterministic utterances, and the intermittent driver/passenger program.
//!
//! Voiced sounds are a Rosenberg glottal pulse train (differentiated for lip
//! radiation) through a cascade of four formant resonators whose targets
//! glide between syllables. Fricatives are band-limited noise. A fixed-phase
//! equalizer then matches each utterance's third-octave long-term spectrum
//! to the average speech spectrum of Byrne et al. (1994), so the material
//! carries a realistic share of energy around the low comb-filter nulls.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cabin_mwf::noise::EnvelopeTable;
use cabin_mwf::room::SourceLabel;
use cabin_mwf::signal::RealFft;

/// Vowel formant targets F1..F3, Hz.
const VOWELS: [[f64; 3]; 6] = [
    [730.0, 1090.0, 2440.0], // a
    [530.0, 1840.0, 2480.0], // e
    [270.0, 2290.0, 3010.0], // i
    [570.0, 840.0, 2410.0],  // o
    [300.0, 870.0, 2240.0],  // u
    [660.0, 1720.0, 2410.0], // ae
];

const F4: f64 = 3500.0;
/// Noise onsets relative to the unit glottal excitation.
const FRICATIVE_LEVEL: f64 = 0.15;
/// First-difference weight on the voiced path, lifting the upper formants.
const PRE_EMPHASIS: f64 = 0.7;
const BANDWIDTHS: [f64; 4] = [80.0, 100.0, 140.0, 220.0];

/// Third-octave long-term average speech spectrum, dB SPL at 70 dB overall
/// (Byrne et al., J. Acoust. Soc. Am. 96, 1994, combined talkers).
pub const LTASS_BANDS: [(f64, f64); 22] = [
    (63.0, 38.6),
    (80.0, 43.5),
    (100.0, 54.4),
    (125.0, 57.7),
    (160.0, 56.8),
    (200.0, 58.2),
    (250.0, 59.7),
    (315.0, 60.0),
    (400.0, 62.4),
    (500.0, 62.6),
    (630.0, 60.6),
    (800.0, 55.7),
    (1000.0, 53.1),
    (1250.0, 53.3),
    (1600.0, 51.7),
    (2000.0, 48.8),
    (2500.0, 47.2),
    (3150.0, 46.8),
    (4000.0, 45.6),
    (5000.0, 44.6),
    (6300.0, 44.0),
    (8000.0, 42.7),
];

#[derive(Debug, Clone, Copy)]
enum Onset {
    None,
    /// Fricative centred at the given frequency.
    Fricative(f64),
    /// Short release burst.
    Plosive,
}

#[derive(Debug, Clone, Copy)]
struct Syllable {
    vowel: usize,
    onset: Onset,
    /// Voiced duration, seconds.
    nucleus: f64,
    /// Pause after the syllable, seconds.
    pause: f64,
    /// Pitch accent in Hz added to the declining baseline.
    accent: f64,
    level_db: f64,
}

const fn syl(vowel: usize, onset: Onset, nucleus: f64, pause: f64, accent: f64, level_db: f64) -> Syllable {
    Syllable {
        vowel,
        onset,
        nucleus,
        pause,
        accent,
        level_db,
    }
}

const S: Onset = Onset::Fricative(4400.0);
const SH: Onset = Onset::Fricative(2800.0);
const F: Onset = Onset::Fricative(4500.0);
const P: Onset = Onset::Plosive;
const N: Onset = Onset::None;

const UTTERANCE_ONE: [Syllable; 11] = [
    syl(0, P, 0.17, 0.03, 12.0, 0.0),
    syl(2, S, 0.14, 0.10, 4.0, -2.0),
    syl(3, N, 0.20, 0.02, 18.0, 1.0),
    syl(1, SH, 0.15, 0.04, 6.0, -1.0),
    syl(5, P, 0.22, 0.16, 0.0, 0.0),
    syl(4, F, 0.16, 0.03, 10.0, -3.0),
    syl(0, N, 0.24, 0.05, 14.0, 1.5),
    syl(2, P, 0.12, 0.12, 2.0, -2.5),
    syl(3, S, 0.18, 0.03, 8.0, -1.0),
    syl(1, P, 0.16, 0.04, 0.0, -2.0),
    syl(0, SH, 0.28, 0.0, -6.0, -1.5),
];

const UTTERANCE_TWO: [Syllable; 10] = [
    syl(1, F, 0.18, 0.04, 10.0, -1.0),
    syl(0, P, 0.21, 0.03, 16.0, 1.0),
    syl(4, N, 0.15, 0.14, 4.0, -2.0),
    syl(5, S, 0.23, 0.03, 12.0, 0.5),
    syl(2, P, 0.13, 0.05, 2.0, -3.0),
    syl(3, SH, 0.20, 0.18, 6.0, 0.0),
    syl(0, P, 0.19, 0.03, 14.0, 1.0),
    syl(1, N, 0.14, 0.04, 0.0, -2.0),
    syl(4, S, 0.17, 0.05, -2.0, -1.5),
    syl(5, P, 0.26, 0.0, -8.0, -0.5),
];

/// Second-order resonator with unity gain at DC.
#[derive(Debug, Clone, Copy, Default)]
struct Resonator {
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn step(&mut self, x: f64, freq: f64, bw: f64, rate: f64) -> f64 {
        let r = (-std::f64::consts::PI * bw / rate).exp();
        let a1 = 2.0 * r * (2.0 * std::f64::consts::PI * freq / rate).cos();
        let a2 = -r * r;
        let y = (1.0 - a1 - a2) * x + a1 * self.y1 + a2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Rosenberg glottal flow over one period at phase `t` in [0, 1).
fn rosenberg(t: f64) -> f64 {
    const OPEN: f64 = 0.4;
    const CLOSE: f64 = 0.16;
    if t < OPEN {
        0.5 * (1.0 - (std::f64::consts::PI * t / OPEN).cos())
    } else if t < OPEN + CLOSE {
        (0.5 * std::f64::consts::PI * (t - OPEN) / CLOSE).cos()
    } else {
        0.0
    }
}

/// Raised-cosine fade in over `a` and out over `r` samples of an `n`-sample span.
fn envelope(i: usize, n: usize, a: usize, r: usize) -> f64 {
    let up = if i < a {
        0.5 * (1.0 - (std::f64::consts::PI * i as f64 / a as f64).cos())
    } else {
        1.0
    };
    let left = n - 1 - i.min(n - 1);
    let down = if left < r {
        0.5 * (1.0 - (std::f64::consts::PI * left as f64 / r as f64).cos())
    } else {
        1.0
    };
    up * down
}

fn synthesize(syllables: &[Syllable], seed: u64, sample_rate: u32) -> Vec<f64> {
    let rate = sample_rate as f64;
    let secs = |s: f64| (s * rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut formants = [Resonator::default(); 4];
    let mut fric = [Resonator::default(); 2];
    let mut prev_target = VOWELS[syllables[0].vowel];
    let total: f64 = syllables.iter().map(|s| s.nucleus + s.pause + 0.08).sum();
    let mut phase = 0.0;
    let mut last_flow = 0.0;
    let mut last_voiced = 0.0;
    for s in syllables {
        let gain = 10f64.powf(s.level_db / 20.0);
        match s.onset {
            Onset::None => {}
            Onset::Fricative(fc) => {
                let n = secs(0.08);
                for i in 0..n {
                    let w: f64 = rng.random_range(-1.0..1.0);
                    let y = fric[0].step(w, fc, 3000.0, rate);
                    let y = fric[1].step(y, fc, 4000.0, rate);
                    out.push(FRICATIVE_LEVEL * gain * y * envelope(i, n, secs(0.02), secs(0.02)));
                }
            }
            Onset::Plosive => {
                out.extend(std::iter::repeat_n(0.0, secs(0.03)));
                let n = secs(0.015);
                for i in 0..n {
                    let w: f64 = rng.random_range(-1.0..1.0);
                    let y = fric[0].step(w, 3000.0, 3000.0, rate);
                    out.push(FRICATIVE_LEVEL * gain * y * envelope(i, n, 2, n / 2));
                }
            }
        }
        let target = VOWELS[s.vowel];
        let n = secs(s.nucleus);
        let glide = secs(0.04).min(n / 2);
        for i in 0..n {
            let progress = out.len() as f64 / (total * rate);
            let f0_base = 135.0 - 30.0 * progress.min(1.0);
            let bend = (std::f64::consts::PI * i as f64 / n as f64).sin();
            let jitter = 1.0 + 0.01 * rng.random_range(-1.0..1.0);
            let f0 = (f0_base + s.accent * bend) * jitter;
            phase += f0 / rate;
            if phase >= 1.0 {
                phase -= 1.0;
            }
            let flow = rosenberg(phase);
            let excite = (flow - last_flow) * rate / 1000.0 + 0.02 * rng.random_range(-1.0..1.0);
            last_flow = flow;
            let t = if i < glide { i as f64 / glide as f64 } else { 1.0 };
            let mut y = excite;
            for (k, res) in formants.iter_mut().enumerate() {
                let f = if k < 3 {
                    prev_target[k] + t * (target[k] - prev_target[k])
                } else {
                    F4
                };
                y = res.step(y, f, BANDWIDTHS[k], rate);
            }
            let a = secs(0.025);
            let r = secs(0.05);
            let lifted = y - PRE_EMPHASIS * last_voiced;
            last_voiced = y;
            out.push(gain * lifted * envelope(i, n, a, r));
        }
        prev_target = target;
        out.extend(std::iter::repeat_n(0.0, secs(s.pause)));
    }
    let mut out = equalize_to_ltass(&out, rate);
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    out
}

/// Power in the third-octave band centred at `fc`.
fn third_octave_power(spectrum: &[f64], bin_hz: f64, fc: f64) -> f64 {
    let (lo, hi) = (fc * 2f64.powf(-1.0 / 6.0), fc * 2f64.powf(1.0 / 6.0));
    spectrum
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = *k as f64 * bin_hz;
            f >= lo && f < hi
        })
        .map(|(_, p)| p)
        .sum()
}

/// Zero-phase equalization of `x` so its third-octave levels follow
/// [`LTASS_BANDS`] up to a constant.
fn equalize_to_ltass(x: &[f64], rate: f64) -> Vec<f64> {
    let n = (2 * x.len()).next_power_of_two();
    let fft = RealFft::new(n);
    let mut spec = fft.forward(x);
    let power: Vec<f64> = spec.iter().map(|c| c.norm_sqr()).collect();
    let bin_hz = rate / n as f64;
    let nyquist = 0.5 * rate;
    let mut correction = Vec::new();
    for &(fc, level) in LTASS_BANDS.iter().filter(|b| b.0 * 2f64.powf(1.0 / 6.0) <= nyquist) {
        let p = third_octave_power(&power, bin_hz, fc);
        if p > 0.0 {
            correction.push((fc, level - 10.0 * p.log10()));
        }
    }
    let table = EnvelopeTable::new(correction).expect("at least one populated band");
    spec[0] = 0.0.into();
    for (k, c) in spec.iter_mut().enumerate().skip(1) {
        *c *= 10f64.powf(table.level_db(k as f64 * bin_hz) / 20.0);
    }
    let mut y = fft.inverse(&spec);
    y.truncate(x.len());
    y
}

/// The two built-in utterances at `sample_rate`.
pub fn builtin_utterances(sample_rate: u32) -> [Vec<f64>; 2] {
    [
        synthesize(&UTTERANCE_ONE, 0x5eed_0001, sample_rate),
        synthesize(&UTTERANCE_TWO, 0x5eed_0002, sample_rate),
    ]
}

/// Layout of the intermittent talker program.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramLayout {
    /// Silence before the first utterance, seconds.
    pub lead_in: f64,
    /// Silence between consecutive utterances, seconds.
    pub gap: f64,
    /// The cycle passenger/driver over both utterances repeats until the
    /// program is at least this long.
    pub min_duration: f64,
    /// Silence after the last utterance, seconds.
    pub tail: f64,
}

impl Default for ProgramLayout {
    fn default() -> Self {
        Self {
            lead_in: 1.0,
            gap: 0.5,
            min_duration: 20.0,
            tail: 0.5,
        }
    }
}

/// One placed utterance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub talker: SourceLabel,
    pub utterance: usize,
    pub start: usize,
    pub len: usize,
}

/// Dry signals of both talkers with the placement log.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub driver: Vec<f64>,
    pub passenger: Vec<f64>,
    pub placements: Vec<Placement>,
}

impl Program {
    pub fn len(&self) -> usize {
        self.driver.len()
    }

    pub fn is_empty(&self) -> bool {
        self.driver.is_empty()
    }
}

/// Lays the utterances out without overlap: passenger and driver take turns
/// saying each utterance, the passenger first.
pub fn build_program(utterances: &[Vec<f64>], layout: &ProgramLayout, sample_rate: u32) -> Program {
    let rate = sample_rate as f64;
    let secs = |s: f64| (s * rate).round() as usize;
    let mut pos = secs(layout.lead_in);
    let mut placements = Vec::new();
    let min_end = secs(layout.min_duration);
    'outer: loop {
        for (u, utt) in utterances.iter().enumerate() {
            for talker in [SourceLabel::Passenger, SourceLabel::Driver] {
                placements.push(Placement {
                    talker,
                    utterance: u,
                    start: pos,
                    len: utt.len(),
                });
                pos += utt.len();
                if pos + secs(layout.tail) >= min_end && talker == SourceLabel::Driver {
                    break 'outer;
                }
                pos += secs(layout.gap);
            }
        }
        if utterances.is_empty() {
            break;
        }
    }
    let total = (pos + secs(layout.tail)).max(min_end);
    let mut driver = vec![0.0; total];
    let mut passenger = vec![0.0; total];
    for p in &placements {
        let dst = match p.talker {
            SourceLabel::Driver => &mut driver,
            SourceLabel::Passenger => &mut passenger,
        };
        dst[p.start..p.start + p.len].copy_from_slice(&utterances[p.utterance]);
    }
    Program {
        driver,
        passenger,
        placements,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cabin_mwf::metrics::{long_term_spectrum, WelchConfig};

    const RATE: u32 = 16_000;

    #[test]
    fn utterances_are_deterministic_and_bounded() {
        let a = builtin_utterances(RATE);
        let b = builtin_utterances(RATE);
        assert_eq!(a, b);
        for u in &a {
            let secs = u.len() as f64 / RATE as f64;
            assert!((1.5..4.0).contains(&secs), "{secs}");
            let peak = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((peak - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn long_term_spectrum_is_speech_like() {
        let [a, b] = builtin_utterances(RATE);
        let x: Vec<f64> = a.iter().chain(&b).copied().collect();
        let psd = long_term_spectrum(&x, RATE, &WelchConfig::default()).unwrap();
        let band = |lo: f64, hi: f64| {
            let v: Vec<f64> = psd
                .freqs
                .iter()
                .zip(&psd.db)
                .filter(|(f, _)| **f >= lo && **f < hi)
                .map(|(_, d)| 10f64.powf(d / 10.0))
                .collect();
            10.0 * (v.iter().sum::<f64>() / v.len() as f64).log10()
        };
        let low = band(250.0, 700.0);
        let k1 = band(800.0, 1200.0);
        let k2 = band(1700.0, 2300.0);
        let k4 = band(3500.0, 4500.0);
        let k7 = band(6000.0, 7500.0);
        assert!(low > k1 && k1 > k2 && k2 > k4 && k4 > k7, "{low} {k1} {k2} {k4} {k7}");
        let slope = (k1 - k4) / 2.0;
        assert!((3.0..10.0).contains(&slope), "slope {slope} dB/oct");
        assert!(low - k7 > 20.0);
    }

    #[test]
    fn program_alternates_without_overlap() {
        let u = builtin_utterances(RATE);
        let p = build_program(&u, &ProgramLayout::default(), RATE);
        assert!(p.len() as f64 / RATE as f64 >= 20.0);
        assert_eq!(p.placements[0].talker, SourceLabel::Passenger);
        assert_eq!(p.placements.last().unwrap().talker, SourceLabel::Driver);
        for w in p.placements.windows(2) {
            assert!(w[1].start >= w[0].start + w[0].len);
        }
        let overlap = p
            .driver
            .iter()
            .zip(&p.passenger)
            .filter(|(a, b)| **a != 0.0 && **b != 0.0)
            .count();
        assert_eq!(overlap, 0);
        let lead = RATE as usize;
        assert!(p.driver[..lead].iter().chain(&p.passenger[..lead]).all(|v| *v == 0.0));
    }

    #[test]
    fn long_program_loops() {
        let u = builtin_utterances(RATE);
        let layout = ProgramLayout {
            min_duration: 68.0,
            ..ProgramLayout::default()
        };
        let p = build_program(&u, &layout, RATE);
        assert!(p.len() >= 68 * RATE as usize);
        assert!(p.placements.len() >= 16);
    }
}
