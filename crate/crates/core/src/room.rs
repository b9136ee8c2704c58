//! Image-method simulation of a rectangular cabin.
//!
//! Every image source contributes `beta^reflections * directivity / (4 pi d)`
//! at a delay of `d / c` seconds, realised with a Hann-windowed sinc so that
//! sub-sample delay differences between the microphones survive. Wall
//! reflection is uniform and derived from RT60 through Sabine's formula.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{self, MultichannelSignal, WavEncoding};

pub const SPEED_OF_SOUND: f64 = 343.0;
pub const DEFAULT_IR_LENGTH: usize = 1024;
pub const DEFAULT_CROSSFADE_SECS: f64 = 0.010;

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceLabel {
    Driver,
    Passenger,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub position: Point3,
    pub label: SourceLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directivity {
    Omni,
    Cardioid,
}

impl Directivity {
    /// Gain for a wave arriving at angle `theta` from the microphone axis,
    /// given as `cos(theta)`.
    pub fn gain(self, cos_theta: f64) -> f64 {
        match self {
            Directivity::Omni => 1.0,
            Directivity::Cardioid => 0.5 * (1.0 + cos_theta),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Microphone {
    pub position: Point3,
    /// Unit vector along the microphone axis.
    pub orientation: Point3,
    pub pattern: Directivity,
}

impl Microphone {
    /// Cardioid at `position` aimed at `target`.
    pub fn cardioid_towards(position: Point3, target: Point3) -> Self {
        let axis = normalized(sub(target, position));
        Self {
            position,
            orientation: axis,
            pattern: Directivity::Cardioid,
        }
    }
}

/// Cabin geometry with its sources and microphones.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Length (front to back), width (left to right), height, in metres.
    pub room_dims: Point3,
    pub rt60: f64,
    pub sources: Vec<Source>,
    pub mics: Vec<Microphone>,
    pub speed_of_sound: f64,
    pub ir_length: usize,
    pub sample_rate: u32,
    /// Uniform wall reflection coefficient used instead of the RT60-derived
    /// one (e.g. `Some(0.0)` for an anechoic reference).
    pub reflection_override: Option<f64>,
}

/// Driver/passenger positions and microphone placement measured inside a
/// 5 x 2 x 1.78 m cabin: x from the front, y from the left side, z from the
/// floor.
pub mod default_cabin {
    use super::Point3;

    pub const ROOM_DIMS: Point3 = [5.0, 2.0, 1.78];
    pub const RT60: f64 = 0.07;
    pub const PRIMARY_MIC: Point3 = [1.65, 0.6, 1.7];
    pub const SECONDARY_MIC: Point3 = [1.65, 1.4, 1.7];
    pub const DRIVER: Point3 = [2.5, 0.6, 0.75];
    pub const PASSENGER: Point3 = [2.5, 1.4, 0.75];
}

impl Scene {
    /// Two-seat cabin with cardioids aimed at their own talker.
    pub fn two_seat(driver: Point3, passenger: Point3, primary: Point3, secondary: Point3) -> Self {
        Self {
            room_dims: default_cabin::ROOM_DIMS,
            rt60: default_cabin::RT60,
            sources: vec![
                Source {
                    position: driver,
                    label: SourceLabel::Driver,
                },
                Source {
                    position: passenger,
                    label: SourceLabel::Passenger,
                },
            ],
            mics: vec![
                Microphone::cardioid_towards(primary, driver),
                Microphone::cardioid_towards(secondary, passenger),
            ],
            speed_of_sound: SPEED_OF_SOUND,
            ir_length: DEFAULT_IR_LENGTH,
            sample_rate: signal::DEFAULT_SAMPLE_RATE,
            reflection_override: None,
        }
    }

    pub fn default_cabin() -> Self {
        Self::two_seat(
            default_cabin::DRIVER,
            default_cabin::PASSENGER,
            default_cabin::PRIMARY_MIC,
            default_cabin::SECONDARY_MIC,
        )
    }

    /// Copy with the driver moved; the primary microphone stays aimed at
    /// the original seat.
    pub fn with_driver_at(&self, position: Point3) -> Self {
        let mut s = self.clone();
        if let Some(src) = s.sources.iter_mut().find(|s| s.label == SourceLabel::Driver) {
            src.position = position;
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let [lx, ly, lz] = self.room_dims;
        if !(lx > 0.0 && ly > 0.0 && lz > 0.0) {
            return Err(Error::InvalidScene(format!(
                "room dimensions must be positive, got {:?}",
                self.room_dims
            )));
        }
        if !(self.rt60 > 0.0) {
            return Err(Error::InvalidScene(format!("rt60 must be positive, got {}", self.rt60)));
        }
        if !(self.speed_of_sound > 0.0) {
            return Err(Error::InvalidScene("speed of sound must be positive".into()));
        }
        if self.ir_length == 0 || self.sample_rate == 0 {
            return Err(Error::InvalidScene("ir_length and sample_rate must be positive".into()));
        }
        if let Some(beta) = self.reflection_override {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::InvalidScene(format!(
                    "reflection coefficient {beta} outside [0, 1)"
                )));
            }
        }
        let inside = |p: &Point3, what: String| -> Result<()> {
            for (axis, (&v, &l)) in ["x", "y", "z"].iter().zip(p.iter().zip(&self.room_dims)) {
                if !(v > 0.0 && v < l) {
                    return Err(Error::InvalidScene(format!(
                        "{what}.{axis} = {v} is outside the room (0, {l})"
                    )));
                }
            }
            Ok(())
        };
        for (i, s) in self.sources.iter().enumerate() {
            inside(&s.position, format!("sources[{i}]"))?;
        }
        for (i, m) in self.mics.iter().enumerate() {
            inside(&m.position, format!("mics[{i}]"))?;
            let n = norm(m.orientation);
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidScene(format!(
                    "mics[{i}] orientation has norm {n}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Wall reflection coefficient in effect for this scene.
    pub fn beta(&self) -> Result<f64> {
        match self.reflection_override {
            Some(b) => Ok(b),
            None => beta_from_rt60(self.room_dims, self.rt60, self.speed_of_sound),
        }
    }

    pub fn source_index(&self, label: SourceLabel) -> Option<usize> {
        self.sources.iter().position(|s| s.label == label)
    }
}

/// Sabine calibration: `alpha = 24 ln(10) V / (c S rt60)`, `beta = sqrt(1 - alpha)`.
pub fn beta_from_rt60(room_dims: Point3, rt60: f64, speed_of_sound: f64) -> Result<f64> {
    let [lx, ly, lz] = room_dims;
    if !(rt60 > 0.0) || !(lx > 0.0 && ly > 0.0 && lz > 0.0) || !(speed_of_sound > 0.0) {
        return Err(Error::InvalidScene(format!(
            "rt60 {rt60} s and room dimensions {room_dims:?} must be positive"
        )));
    }
    if rt60.is_infinite() {
        return Ok(1.0);
    }
    let volume = lx * ly * lz;
    let surface = 2.0 * (lx * ly + lx * lz + ly * lz);
    let alpha = 24.0 * 10f64.ln() * volume / (speed_of_sound * surface * rt60);
    if alpha >= 1.0 {
        return Err(Error::Rt60Unachievable { rt60, alpha });
    }
    Ok((1.0 - alpha).sqrt())
}

/// Image-method impulse response from `scene.sources[source_idx]` to
/// `scene.mics[mic_idx]`, `scene.ir_length` samples long.
pub fn generate_rir(scene: &Scene, source_idx: usize, mic_idx: usize) -> Result<Vec<f64>> {
    scene.validate()?;
    let source = scene
        .sources
        .get(source_idx)
        .ok_or_else(|| Error::InvalidScene(format!("no source {source_idx}")))?;
    let mic = scene
        .mics
        .get(mic_idx)
        .ok_or_else(|| Error::InvalidScene(format!("no microphone {mic_idx}")))?;
    let beta = scene.beta()?;
    Ok(image_method(
        scene.room_dims,
        source.position,
        mic,
        beta,
        scene.speed_of_sound,
        scene.sample_rate as f64,
        scene.ir_length,
    ))
}

fn image_method(
    room: Point3,
    source: Point3,
    mic: &Microphone,
    beta: f64,
    c: f64,
    fs: f64,
    n_samples: usize,
) -> Vec<f64> {
    // Distances in samples.
    let cts = c / fs;
    let s = source.map(|v| v / cts);
    let r = mic.position.map(|v| v / cts);
    let l = room.map(|v| v / cts);
    let tw = 2 * (0.004 * fs).round() as usize;
    let half = (tw / 2) as i64;
    let mut imp = vec![0.0; n_samples];
    let mut lpi = vec![0.0; tw];
    let orders = l.map(|li| (n_samples as f64 / (2.0 * li)).ceil() as i64);
    let bpow = |e: i64| beta.powi(e.unsigned_abs() as i32);

    for mx in -orders[0]..=orders[0] {
        for my in -orders[1]..=orders[1] {
            for mz in -orders[2]..=orders[2] {
                let rm = [2.0 * mx as f64 * l[0], 2.0 * my as f64 * l[1], 2.0 * mz as f64 * l[2]];
                for q in 0..=1i64 {
                    for j in 0..=1i64 {
                        for k in 0..=1i64 {
                            let rel = [
                                (1 - 2 * q) as f64 * s[0] - r[0] + rm[0],
                                (1 - 2 * j) as f64 * s[1] - r[1] + rm[1],
                                (1 - 2 * k) as f64 * s[2] - r[2] + rm[2],
                            ];
                            let dist = norm(rel);
                            let fdist = dist.floor();
                            if fdist >= n_samples as f64 {
                                continue;
                            }
                            let refl = bpow(mx - q) * bpow(mx) * bpow(my - j) * bpow(my) * bpow(mz - k) * bpow(mz);
                            if refl == 0.0 {
                                continue;
                            }
                            let cos_theta = if dist > 0.0 {
                                dot(rel, mic.orientation) / dist
                            } else {
                                1.0
                            };
                            let gain = mic.pattern.gain(cos_theta) * refl / (4.0 * PI * dist * cts);
                            if gain == 0.0 {
                                continue;
                            }
                            let frac = dist - fdist;
                            for (n, v) in lpi.iter_mut().enumerate() {
                                let t = (n as f64 + 1.0 - frac) - half as f64;
                                let w = 0.5 * (1.0 - (2.0 * PI * (n as f64 + 1.0 - frac) / tw as f64).cos());
                                *v = w * sinc(PI * t);
                            }
                            let start = fdist as i64 - half + 1;
                            for (n, v) in lpi.iter().enumerate() {
                                let idx = start + n as i64;
                                if idx >= 0 && (idx as usize) < n_samples {
                                    imp[idx as usize] += gain * v;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    imp
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Impulse responses `ir[source][mic]` for one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponseSet {
    ir: Vec<Vec<Vec<f64>>>,
    sample_rate: u32,
}

impl ImpulseResponseSet {
    pub fn new(ir: Vec<Vec<Vec<f64>>>, sample_rate: u32) -> Result<Self> {
        let len = ir
            .first()
            .and_then(|r| r.first())
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidScene("empty impulse response set".into()))?;
        let mics = ir[0].len();
        for row in &ir {
            if row.len() != mics || row.iter().any(|h| h.len() != len) {
                return Err(Error::InvalidScene("impulse responses differ in shape".into()));
            }
            if row.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("impulse response"));
            }
        }
        Ok(Self { ir, sample_rate })
    }

    pub fn get(&self, source: usize, mic: usize) -> &[f64] {
        &self.ir[source][mic]
    }

    pub fn num_sources(&self) -> usize {
        self.ir.len()
    }

    pub fn num_mics(&self) -> usize {
        self.ir[0].len()
    }

    pub fn len(&self) -> usize {
        self.ir[0][0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn energy(&self, source: usize, mic: usize) -> f64 {
        signal::energy(&self.ir[source][mic])
    }

    /// Same-side energy over cross-side energy for `source`, in dB. Source
    /// `i` is on the same side as microphone `i`.
    pub fn cross_side_attenuation_db(&self, source: usize) -> f64 {
        let other = 1 - source;
        10.0 * (self.energy(source, source) / self.energy(source, other)).log10()
    }

    /// Writes each response as `ir_s{source}_m{mic}.wav` (32-bit float).
    pub fn save_wavs(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        for (s, row) in self.ir.iter().enumerate() {
            for (m, h) in row.iter().enumerate() {
                let sig = MultichannelSignal::mono(h.clone(), self.sample_rate)?;
                signal::save_wav(&sig, dir.join(format!("ir_s{s}_m{m}.wav")), WavEncoding::Float32)?;
            }
        }
        Ok(())
    }
}

/// The 2x2 response set. With `cross_side_attenuation_db`, each cross path
/// (driver to secondary, passenger to primary) is rescaled so its energy sits
/// exactly that many dB below the source's same-side path.
pub fn generate_rir_set(scene: &Scene, cross_side_attenuation_db: Option<f64>) -> Result<ImpulseResponseSet> {
    if scene.sources.len() != 2 || scene.mics.len() != 2 {
        return Err(Error::InvalidScene(format!(
            "expected 2 sources and 2 microphones, got {} and {}",
            scene.sources.len(),
            scene.mics.len()
        )));
    }
    if let Some(att) = cross_side_attenuation_db {
        if !(att >= 0.0) || !att.is_finite() {
            return Err(Error::InvalidScene(format!(
                "cross-side attenuation must be a non-negative number of dB, got {att}"
            )));
        }
    }
    let mut ir = Vec::with_capacity(2);
    for s in 0..2 {
        ir.push(vec![generate_rir(scene, s, 0)?, generate_rir(scene, s, 1)?]);
    }
    if let Some(att) = cross_side_attenuation_db {
        for (s, row) in ir.iter_mut().enumerate() {
            let same = signal::energy(&row[s]);
            let cross = signal::energy(&row[1 - s]);
            if cross > 0.0 {
                let gain = (same / cross / 10f64.powf(att / 10.0)).sqrt();
                row[1 - s].iter_mut().for_each(|v| *v *= gain);
            }
        }
    }
    ImpulseResponseSet::new(ir, scene.sample_rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSegment {
    /// Segment start in seconds.
    pub start: f64,
    pub scene: Scene,
}

/// Scene changes over time, e.g. a talker leaning away and back.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSchedule {
    pub segments: Vec<ScheduleSegment>,
    /// Linear crossfade length at each switch, in seconds.
    pub crossfade: f64,
}

impl PositionSchedule {
    pub fn fixed(scene: Scene) -> Self {
        Self {
            segments: vec![ScheduleSegment { start: 0.0, scene }],
            crossfade: DEFAULT_CROSSFADE_SECS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .segments
            .first()
            .ok_or_else(|| Error::InvalidSchedule("no segments".into()))?;
        if first.start > 0.0 {
            return Err(Error::InvalidSchedule(format!(
                "first segment starts at {} s, leaving a gap at the start",
                first.start
            )));
        }
        if !(self.crossfade >= 0.0) {
            return Err(Error::InvalidSchedule("crossfade must be non-negative".into()));
        }
        for pair in self.segments.windows(2) {
            if pair[1].start < pair[0].start + self.crossfade || pair[1].start <= pair[0].start {
                return Err(Error::InvalidSchedule(format!(
                    "segment at {} s starts before the previous one at {} s plus the crossfade",
                    pair[1].start, pair[0].start
                )));
            }
            let (a, b) = (&pair[0].scene, &pair[1].scene);
            if a.sources.len() != b.sources.len() || a.mics.len() != b.mics.len() || a.sample_rate != b.sample_rate {
                return Err(Error::InvalidSchedule("segments disagree on scene layout".into()));
            }
        }
        Ok(())
    }
}

/// Per-source microphone components and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedScene {
    /// `components[source]` has one channel per microphone.
    pub components: Vec<MultichannelSignal>,
    pub mics: MultichannelSignal,
}

/// Convolves each dry source (one channel per source) through the scheduled
/// impulse responses. Output keeps the dry signal length; IR switches are
/// blended with a linear crossfade that starts at each segment start.
pub fn render_scene(
    dry_sources: &MultichannelSignal,
    schedule: &PositionSchedule,
    cross_side_attenuation_db: Option<f64>,
) -> Result<RenderedScene> {
    schedule.validate()?;
    let rate = schedule.segments[0].scene.sample_rate;
    if dry_sources.sample_rate() != rate {
        return Err(Error::InvalidScene(format!(
            "dry sources at {} Hz, scene at {rate} Hz",
            dry_sources.sample_rate()
        )));
    }
    let num_sources = schedule.segments[0].scene.sources.len();
    if dry_sources.num_channels() != num_sources {
        return Err(Error::InvalidScene(format!(
            "{} dry signals for {num_sources} sources",
            dry_sources.num_channels()
        )));
    }
    let n = dry_sources.len();
    let fs = rate as f64;
    let fade = (schedule.crossfade * fs).round() as usize;
    let starts: Vec<usize> = schedule
        .segments
        .iter()
        .map(|s| (s.start.max(0.0) * fs).round() as usize)
        .collect();
    let ramp = |k: usize, t: usize| -> f64 {
        if k == 0 {
            1.0
        } else if t < starts[k] {
            0.0
        } else if fade == 0 || t >= starts[k] + fade {
            1.0
        } else {
            (t - starts[k]) as f64 / fade as f64
        }
    };

    let sets: Vec<ImpulseResponseSet> = schedule
        .segments
        .iter()
        .map(|s| generate_rir_set(&s.scene, cross_side_attenuation_db))
        .collect::<Result<_>>()?;
    let num_mics = sets[0].num_mics();
    let mut components = vec![vec![vec![0.0; n]; num_mics]; num_sources];

    for (k, set) in sets.iter().enumerate() {
        let lo = starts[k].min(n);
        let hi = starts.get(k + 1).map_or(n, |s| (s + fade).min(n));
        if lo >= hi {
            continue;
        }
        let ir_len = set.len();
        let from = lo.saturating_sub(ir_len - 1);
        for (src, comp) in components.iter_mut().enumerate() {
            let x = &dry_sources.channel(src)[from..hi];
            for (mic, out) in comp.iter_mut().enumerate() {
                let y = signal::convolve(x, set.get(src, mic));
                for t in lo..hi {
                    let w = ramp(k, t) - if k + 1 < sets.len() { ramp(k + 1, t) } else { 0.0 };
                    if w != 0.0 {
                        out[t] += w * y[t - from];
                    }
                }
            }
        }
    }

    let components: Vec<MultichannelSignal> = components
        .into_iter()
        .map(|c| MultichannelSignal::new(c, rate))
        .collect::<Result<_>>()?;
    let mut mics = components[0].clone();
    for c in &components[1..] {
        mics = mics.add(c)?;
    }
    Ok(RenderedScene { components, mics })
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: Point3, b: Point3) -> f64 {
    norm(sub(a, b))
}

fn normalized(a: Point3) -> Point3 {
    let n = norm(a);
    a.map(|v| v / n)
}
