//! Scenario configuration: TOML with every field optional, validated with
//! field paths in error messages.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cabin_mwf::activity::DetectorConfig;
use cabin_mwf::mwf::{DeltaSchedule, MwfConfig};
use cabin_mwf::noise::{EnvelopeTable, NoiseColor};
use cabin_mwf::room::{default_cabin, Directivity, Microphone, Point3, Scene, DEFAULT_IR_LENGTH, SPEED_OF_SOUND};
use cabin_mwf::signal::StftConfig;

use crate::error::{Result, ScenarioError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Notch,
    Noise,
    Head,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Notch => "notch",
            ExperimentKind::Noise => "noise",
            ExperimentKind::Head => "head",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub sample_rate: u32,
    pub experiment: ExperimentKind,
    pub output_dir: Option<PathBuf>,
    pub scene: SceneConfig,
    pub speech: SpeechConfig,
    pub noise: NoiseConfig,
    pub mwf: MwfSection,
    pub activity: ActivitySection,
    pub notch: NotchSection,
    pub noise_reduction: NoiseReductionSection,
    pub head_movement: HeadMovementSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            sample_rate: 16_000,
            experiment: ExperimentKind::Noise,
            output_dir: None,
            scene: SceneConfig::default(),
            speech: SpeechConfig::default(),
            noise: NoiseConfig::default(),
            mwf: MwfSection::default(),
            activity: ActivitySection::default(),
            notch: NotchSection::default(),
            noise_reduction: NoiseReductionSection::default(),
            head_movement: HeadMovementSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    Cardioid,
    Omni,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    /// Length, width, height in metres.
    pub room: Point3,
    pub rt60: f64,
    pub driver: Point3,
    pub passenger: Point3,
    pub mic1: Point3,
    pub mic2: Point3,
    pub pattern: Pattern,
    pub ir_length: usize,
    pub speed_of_sound: f64,
    /// Rescale cross-side paths to this attenuation; natural if absent.
    pub cross_attenuation_db: Option<f64>,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            room: default_cabin::ROOM_DIMS,
            rt60: default_cabin::RT60,
            driver: default_cabin::DRIVER,
            passenger: default_cabin::PASSENGER,
            mic1: default_cabin::PRIMARY_MIC,
            mic2: default_cabin::SECONDARY_MIC,
            pattern: Pattern::Cardioid,
            ir_length: DEFAULT_IR_LENGTH,
            speed_of_sound: SPEED_OF_SOUND,
            cross_attenuation_db: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpeechConfig {
    /// WAV utterances; the built-in pair when empty.
    pub files: Vec<PathBuf>,
    pub lead_in: f64,
    pub gap: f64,
    pub tail: f64,
    /// Program length for the static experiments, seconds.
    pub min_duration: f64,
}

impl Default for SpeechConfig {
    fn default() -> Self {
        Self {
            files: Vec::new(),
            lead_in: 1.0,
            gap: 0.5,
            tail: 0.5,
            min_duration: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// white, pink, red, green or hoth.
    pub color: String,
    /// Custom envelope table (Hz, dB); overrides the named colour's table.
    pub envelope_file: Option<PathBuf>,
    pub input_snr_db: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            color: "white".into(),
            envelope_file: None,
            input_snr_db: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaBand {
    pub max_frequency: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MwfSection {
    pub frame_ms: f64,
    pub lambda: f64,
    /// Uniform regularization, used when `delta_schedule` is empty.
    pub delta: f64,
    pub delta_schedule: Vec<DeltaBand>,
    /// Hoth noise runs use the low-band preset unless a schedule is given.
    pub hoth_preset: bool,
    pub warmup_frames: usize,
    pub adaptation_stop_time: Option<f64>,
    pub diagnostic_bins: Vec<usize>,
}

impl Default for MwfSection {
    fn default() -> Self {
        let d = MwfConfig::default();
        Self {
            frame_ms: d.frame_ms,
            lambda: d.lambda,
            delta: 1.0,
            delta_schedule: Vec::new(),
            hoth_preset: true,
            warmup_frames: d.warmup_frames,
            adaptation_stop_time: None,
            diagnostic_bins: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivitySource {
    Oracle,
    Detector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActivitySection {
    /// Labels steering adaptation. Metrics always use the oracle labels.
    pub source: ActivitySource,
    /// Oracle activity threshold relative to the peak frame, dB.
    pub floor_db: f64,
}

impl Default for ActivitySection {
    fn default() -> Self {
        Self {
            source: ActivitySource::Oracle,
            floor_db: -45.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NotchSection {
    pub frame_ms: Vec<f64>,
    pub cross_attenuation_db: Vec<f64>,
    /// Leading silence, seconds.
    pub silence: f64,
    /// Optional passenger segment before the driver; zero leaves the
    /// driver as the only directional source.
    pub passenger_duration: f64,
    pub driver_duration: f64,
    /// Pause between the two directional sources, seconds.
    pub gap: f64,
    /// Spectra use the last `analysis_duration` seconds of the driver.
    pub analysis_duration: f64,
    /// Level of the directional sources over the background noise, dB.
    pub background_snr_db: f64,
    /// Width of the notch reference envelope, octaves.
    pub envelope_octaves: f64,
    /// Depths are read within this distance of each predicted null, Hz.
    pub search_hz: f64,
    /// Nulls above this frequency are not assessed.
    pub max_frequency: f64,
    /// Replaces `mwf.warmup_frames` here. Classes that never occur would
    /// otherwise keep the filters muted.
    pub warmup_frames: usize,
}

impl Default for NotchSection {
    fn default() -> Self {
        Self {
            frame_ms: vec![100.0, 20.0, 8.0],
            cross_attenuation_db: vec![2.0, 10.0],
            silence: 1.0,
            passenger_duration: 0.0,
            driver_duration: 10.0,
            gap: 0.0,
            analysis_duration: 8.0,
            background_snr_db: 30.0,
            envelope_octaves: 2.0,
            search_hz: 40.0,
            max_frequency: 7000.0,
            warmup_frames: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseReductionSection {
    pub colors: Vec<String>,
    pub input_snr_db: Vec<f64>,
}

impl Default for NoiseReductionSection {
    fn default() -> Self {
        Self {
            colors: ["white", "red", "pink", "green", "hoth"].map(String::from).to_vec(),
            input_snr_db: vec![10.0, 5.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeadMovementSection {
    /// Lateral driver displacements towards the left side, metres.
    pub displacements: Vec<f64>,
    pub start: f64,
    pub end: f64,
    pub duration: f64,
    /// Adaptation stop for the frozen variant, seconds.
    pub stop_time: f64,
    pub input_snr_db: f64,
}

impl Default for HeadMovementSection {
    fn default() -> Self {
        Self {
            displacements: vec![0.10, 0.15],
            start: 36.0,
            end: 52.0,
            duration: 68.0,
            stop_time: 36.0,
            input_snr_db: 5.0,
        }
    }
}

fn invalid(path: &str, detail: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Config(format!("{path}: {detail}"))
}

fn check_positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("{v} must be positive")))
    }
}

fn check_inside(path: &str, p: Point3, room: Point3) -> Result<()> {
    for (axis, name) in ["x", "y", "z"].iter().enumerate() {
        if !(p[axis] > 0.0 && p[axis] < room[axis]) {
            return Err(invalid(
                &format!("{path}[{axis}]"),
                format!("{name} = {} is outside the room (0, {})", p[axis], room[axis]),
            ));
        }
    }
    Ok(())
}

/// Noise colour by name, with an optional table override.
pub fn resolve_color(name: &str, envelope: Option<&EnvelopeTable>) -> Result<NoiseColor> {
    let color = NoiseColor::from_name(name).ok_or_else(|| {
        invalid(
            "noise.color",
            format!("unknown colour {name:?} (white, pink, red, green, hoth)"),
        )
    })?;
    Ok(match (color, envelope) {
        (NoiseColor::Green(_), Some(t)) => NoiseColor::Green(t.clone()),
        (NoiseColor::Hoth(_), Some(t)) => NoiseColor::Hoth(t.clone()),
        (c, _) => c,
    })
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg: Self =
            toml::from_str(&text).map_err(|e| ScenarioError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.speech.files.iter_mut().for_each(rebase);
        if let Some(p) = cfg.noise.envelope_file.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.output_dir.as_mut() {
            rebase(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate < 8000 {
            return Err(invalid(
                "sample_rate",
                format!("{} Hz is below 8000 Hz", self.sample_rate),
            ));
        }
        let s = &self.scene;
        for (i, v) in s.room.iter().enumerate() {
            check_positive(&format!("scene.room[{i}]"), *v)?;
        }
        check_positive("scene.rt60", s.rt60)?;
        check_positive("scene.speed_of_sound", s.speed_of_sound)?;
        if s.ir_length < 2 {
            return Err(invalid("scene.ir_length", "must be at least 2"));
        }
        check_inside("scene.driver", s.driver, s.room)?;
        check_inside("scene.passenger", s.passenger, s.room)?;
        check_inside("scene.mic1", s.mic1, s.room)?;
        check_inside("scene.mic2", s.mic2, s.room)?;
        if let Some(a) = s.cross_attenuation_db {
            if !a.is_finite() {
                return Err(invalid("scene.cross_attenuation_db", "must be finite"));
            }
        }
        self.scene().validate().map_err(|e| invalid("scene", e))?;

        for f in &self.speech.files {
            if !f.is_file() {
                return Err(invalid("speech.files", format!("{} does not exist", f.display())));
            }
        }
        for (name, v) in [
            ("speech.lead_in", self.speech.lead_in),
            ("speech.gap", self.speech.gap),
            ("speech.tail", self.speech.tail),
        ] {
            if !(v >= 0.0) {
                return Err(invalid(name, format!("{v} must be non-negative")));
            }
        }
        check_positive("speech.min_duration", self.speech.min_duration)?;

        if let Some(p) = &self.noise.envelope_file {
            if !p.is_file() {
                return Err(invalid(
                    "noise.envelope_file",
                    format!("{} does not exist", p.display()),
                ));
            }
        }
        resolve_color(&self.noise.color, None)?;
        if !self.noise.input_snr_db.is_finite() {
            return Err(invalid("noise.input_snr_db", "must be finite"));
        }

        let m = &self.mwf;
        check_positive("mwf.frame_ms", m.frame_ms)?;
        if !(m.lambda > 0.0 && m.lambda < 1.0) {
            return Err(invalid("mwf.lambda", format!("{} must lie in (0, 1)", m.lambda)));
        }
        if !(m.delta >= 0.0) || !m.delta.is_finite() {
            return Err(invalid("mwf.delta", format!("{} must be finite and >= 0", m.delta)));
        }
        if !m.delta_schedule.is_empty() {
            self.delta_schedule().map_err(|e| invalid("mwf.delta_schedule", e))?;
        }
        StftConfig::from_frame_ms(m.frame_ms, self.sample_rate).map_err(|e| invalid("mwf.frame_ms", e))?;
        if let Some(t) = m.adaptation_stop_time {
            if t.is_nan() {
                return Err(invalid("mwf.adaptation_stop_time", "is NaN"));
            }
        }
        if !(self.activity.floor_db < 0.0) {
            return Err(invalid("activity.floor_db", "must be negative"));
        }

        let n = &self.notch;
        for (i, f) in n.frame_ms.iter().enumerate() {
            let path = format!("notch.frame_ms[{i}]");
            check_positive(&path, *f)?;
            StftConfig::from_frame_ms(*f, self.sample_rate).map_err(|e| invalid(&path, e))?;
        }
        for (i, a) in n.cross_attenuation_db.iter().enumerate() {
            if !a.is_finite() {
                return Err(invalid(&format!("notch.cross_attenuation_db[{i}]"), "must be finite"));
            }
        }
        for (name, v) in [("notch.passenger_duration", n.passenger_duration), ("notch.gap", n.gap)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must not be negative")));
            }
        }
        for (name, v) in [
            ("notch.driver_duration", n.driver_duration),
            ("notch.analysis_duration", n.analysis_duration),
            ("notch.envelope_octaves", n.envelope_octaves),
            ("notch.search_hz", n.search_hz),
            ("notch.max_frequency", n.max_frequency),
        ] {
            check_positive(name, v)?;
        }
        if n.analysis_duration > n.driver_duration {
            return Err(invalid("notch.analysis_duration", "exceeds notch.driver_duration"));
        }
        if n.analysis_duration < 1.0 {
            return Err(invalid("notch.analysis_duration", "spectra need at least 1 s"));
        }

        for (i, c) in self.noise_reduction.colors.iter().enumerate() {
            resolve_color(c, None)
                .map_err(|_| invalid(&format!("noise_reduction.colors[{i}]"), format!("unknown colour {c:?}")))?;
        }

        let h = &self.head_movement;
        if !(h.start >= 0.0 && h.start < h.end && h.end < h.duration) {
            return Err(invalid(
                "head_movement",
                format!(
                    "need 0 <= start < end < duration, got {}, {}, {}",
                    h.start, h.end, h.duration
                ),
            ));
        }
        for (i, d) in h.displacements.iter().enumerate() {
            let moved = [s.driver[0], s.driver[1] - d, s.driver[2]];
            check_inside(&format!("head_movement.displacements[{i}]"), moved, s.room)?;
        }
        Ok(())
    }

    pub fn scene(&self) -> Scene {
        let s = &self.scene;
        let mut scene = Scene::two_seat(s.driver, s.passenger, s.mic1, s.mic2);
        scene.room_dims = s.room;
        scene.rt60 = s.rt60;
        scene.ir_length = s.ir_length;
        scene.speed_of_sound = s.speed_of_sound;
        scene.sample_rate = self.sample_rate;
        if s.pattern == Pattern::Omni {
            for m in &mut scene.mics {
                *m = Microphone {
                    pattern: Directivity::Omni,
                    ..m.clone()
                };
            }
        }
        scene
    }

    pub fn delta_schedule(&self) -> cabin_mwf::Result<DeltaSchedule> {
        if self.mwf.delta_schedule.is_empty() {
            Ok(DeltaSchedule::uniform(self.mwf.delta))
        } else {
            DeltaSchedule::new(
                self.mwf
                    .delta_schedule
                    .iter()
                    .map(|b| (b.max_frequency, b.delta))
                    .collect(),
            )
        }
    }

    /// Filter settings for a run in `color` noise.
    pub fn mwf_config(&self, color: &NoiseColor) -> MwfConfig {
        let mut schedule = self.delta_schedule().expect("validated");
        if matches!(color, NoiseColor::Hoth(_)) && self.mwf.hoth_preset && self.mwf.delta_schedule.is_empty() {
            schedule = DeltaSchedule::hoth_preset();
        }
        MwfConfig {
            frame_ms: self.mwf.frame_ms,
            lambda: self.mwf.lambda,
            delta_schedule: schedule,
            warmup_frames: self.mwf.warmup_frames,
            adaptation_stop_time: self.mwf.adaptation_stop_time,
            diagnostic_bins: self.mwf.diagnostic_bins.clone(),
        }
    }

    pub fn detector(&self) -> DetectorConfig {
        DetectorConfig::default()
    }

    /// The effective configuration as TOML.
    pub fn resolved(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the resolved configuration, hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.resolved().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
