use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    WavRead {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("failed to write {path}: {source}")]
    WavWrite {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("unsupported WAV encoding in {path}: {detail}")]
    UnsupportedEncoding { path: PathBuf, detail: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("invalid STFT configuration: {0}")]
    InvalidStft(String),
    #[error("signal of {len} samples is shorter than one frame ({frame_len} samples)")]
    SignalTooShort { len: usize, frame_len: usize },
    #[error("inconsistent frames: {0}")]
    InconsistentFrames(String),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("reverberation time {rt60} s is unachievable for this room (Sabine absorption {alpha:.3} >= 1)")]
    Rt60Unachievable { rt60: f64, alpha: f64 },
    #[error("invalid position schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid noise settings: {0}")]
    InvalidNoise(String),
    #[error("malformed envelope table at line {line}: {detail}")]
    EnvelopeTable { line: usize, detail: String },
    #[error("speech power is zero over the calibration segments")]
    ZeroSpeechPower,
    #[error("invalid MWF configuration: {0}")]
    InvalidConfig(String),
    #[error("timeline has {timeline} frames but the stream has {frames}")]
    TimelineMismatch { timeline: usize, frames: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("zero {0} power over the evaluation segments")]
    ZeroPower(&'static str),
    #[error("no active segments for {0}")]
    NoActiveSegments(&'static str),
    #[error("signal of {len} samples is too short for spectral analysis (need at least {min})")]
    TooShortForSpectrum { len: usize, min: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
