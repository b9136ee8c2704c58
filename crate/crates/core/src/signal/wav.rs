use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::MultichannelSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriteSummary {
    /// Samples outside [-1, 1] that were clamped before encoding.
    pub clipped: usize,
}

/// Reads a PCM16 or IEEE-float32 WAV file as samples in [-1, 1].
pub fn load_wav(path: impl AsRef<Path>) -> Result<MultichannelSignal> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|source| Error::WavRead {
        path: path.to_path_buf(),
        source,
    })?;
    let spec = reader.spec();
    let num_channels = spec.channels as usize;
    let read_err = |source| Error::WavRead {
        path: path.to_path_buf(),
        source,
    };
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(read_err)?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| (v as f64).clamp(-1.0, 1.0)))
            .collect::<std::result::Result<_, _>>()
            .map_err(read_err)?,
        (format, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {format:?}; expected 16-bit PCM or 32-bit float"),
            })
        }
    };
    if num_channels == 0 {
        return Err(Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: "zero channels".into(),
        });
    }
    let frames = interleaved.len() / num_channels;
    let mut channels = vec![Vec::with_capacity(frames); num_channels];
    for frame in interleaved.chunks_exact(num_channels) {
        for (c, &v) in channels.iter_mut().zip(frame) {
            c.push(v);
        }
    }
    MultichannelSignal::new(channels, spec.sample_rate)
}

/// Writes `signal`, clamping anything outside [-1, 1].
pub fn save_wav(signal: &MultichannelSignal, path: impl AsRef<Path>, encoding: WavEncoding) -> Result<WriteSummary> {
    let path = path.as_ref();
    if signal.is_empty() {
        return Err(Error::InvalidSignal("cannot write an empty signal".into()));
    }
    if signal.channels().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("WAV samples"));
    }
    let spec = WavSpec {
        channels: signal.num_channels() as u16,
        sample_rate: signal.sample_rate(),
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => SampleFormat::Int,
            WavEncoding::Float32 => SampleFormat::Float,
        },
    };
    let write_err = |source| Error::WavWrite {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = WavWriter::create(path, spec).map_err(write_err)?;
    let mut clipped = 0;
    for n in 0..signal.len() {
        for c in signal.channels() {
            let v = c[n];
            if v.abs() > 1.0 {
                clipped += 1;
            }
            let v = v.clamp(-1.0, 1.0);
            match encoding {
                WavEncoding::Pcm16 => {
                    let code = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(code).map_err(write_err)?;
                }
                WavEncoding::Float32 => writer.write_sample(v as f32).map_err(write_err)?,
            }
        }
    }
    writer.finalize().map_err(write_err)?;
    Ok(WriteSummary { clipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mono_pcm16_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let s = MultichannelSignal::mono((0..160).map(|i| i as f64 / 200.0).collect(), 16_000).unwrap();
        save_wav(&s, &path, WavEncoding::Pcm16).unwrap();
        let r = load_wav(&path).unwrap();
        assert_eq!((r.num_channels(), r.len(), r.sample_rate()), (1, 160, 16_000));
    }

    #[test]
    fn other_rates_pass_through() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.wav");
        let s = MultichannelSignal::zeros(2, 10, 44_100).unwrap();
        save_wav(&s, &path, WavEncoding::Float32).unwrap();
        let r = load_wav(&path).unwrap();
        assert_eq!((r.num_channels(), r.sample_rate()), (2, 44_100));
        assert!(r.channel(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pcm16_saturates_and_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.wav");
        let s = MultichannelSignal::mono(vec![0.0, 1.5, -0.25], 16_000).unwrap();
        let summary = save_wav(&s, &path, WavEncoding::Pcm16).unwrap();
        assert_eq!(summary.clipped, 1);
        let r = load_wav(&path).unwrap();
        assert_eq!(r.channel(0)[1], 32767.0 / 32768.0);
    }

    #[test]
    fn unsupported_encoding_is_descriptive() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16_000,
            bits_per_sample: 24,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        w.write_sample(1i32).unwrap();
        w.finalize().unwrap();
        let err = load_wav(&path).unwrap_err();
        assert!(matches!(err, Error::UnsupportedEncoding { .. }));
        assert!(err.to_string().contains("24-bit"));
    }

    #[test]
    fn missing_file_errors() {
        assert!(matches!(
            load_wav("/nonexistent/nowhere.wav"),
            Err(Error::WavRead { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn pcm16_round_trip_within_one_lsb(
            a in prop::collection::vec(-1.0f64..1.0, 1..200),
        ) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.wav");
            let b: Vec<f64> = a.iter().map(|v| -v * 0.5).collect();
            let s = MultichannelSignal::new(vec![a, b], 16_000).unwrap();
            save_wav(&s, &path, WavEncoding::Pcm16).unwrap();
            let r = load_wav(&path).unwrap();
            prop_assert_eq!(r.num_channels(), 2);
            for (x, y) in s.channels().iter().flatten().zip(r.channels().iter().flatten()) {
                prop_assert!((x - y).abs() <= 1.0 / 32768.0);
            }
        }
    }
}
