use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::Signal;
use crate::error::{Error, Result};

const FULL_SCALE: f64 = 32768.0;

/// Reads a 16-bit PCM mono WAV file, scaling samples into `[-1, 1)`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<Signal> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedChannels(spec.channels));
    }
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedEncoding(format!(
            "{:?} {}-bit",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / FULL_SCALE))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| wav_error(path, e))?;
    Signal::new(samples, spec.sample_rate)
}

/// Writes a signal as 16-bit PCM mono, clamping to `[-1, 1)` before quantizing.
pub fn write_wav(signal: &Signal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for &s in signal.samples() {
        writer.write_sample(quantize(s)).map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

fn quantize(x: f64) -> i16 {
    (x * FULL_SCALE).round().clamp(-FULL_SCALE, FULL_SCALE - 1.0) as i16
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(source) => Error::io(path, source),
        other => Error::Wav {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_raw(path: &Path, channels: u16, values: &[i16]) {
        let spec = WavSpec {
            channels,
            sample_rate: 16000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(path, spec).unwrap();
        for &v in values {
            w.write_sample(v).unwrap();
        }
        w.finalize().unwrap();
    }

    #[test]
    fn reads_scaled_values_and_rate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("three.wav");
        write_raw(&path, 1, &[0, 16384, -32768]);
        let s = read_wav(&path).unwrap();
        assert_eq!(s.samples(), &[0.0, 0.5, -1.0]);
        assert_eq!(s.sample_rate(), 16000);
    }

    #[test]
    fn rejects_stereo_and_float() {
        let dir = tempfile::tempdir().unwrap();
        let stereo = dir.path().join("stereo.wav");
        write_raw(&stereo, 2, &[0, 0, 1, 1]);
        let err = read_wav(&stereo).unwrap_err();
        assert!(err.to_string().contains("unsupported channel count"));

        let float = dir.path().join("float.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16000,
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        };
        let mut w = WavWriter::create(&float, spec).unwrap();
        w.write_sample(0.25f32).unwrap();
        w.finalize().unwrap();
        assert!(matches!(read_wav(&float), Err(Error::UnsupportedEncoding(_))));
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(read_wav("/nonexistent/nothing.wav").is_err());
    }

    #[test]
    fn clamps_and_handles_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.wav");
        write_wav(&Signal::new(vec![2.0, -3.0], 16000).unwrap(), &path).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.samples(), &[32767.0 / 32768.0, -1.0]);

        let empty = dir.path().join("empty.wav");
        write_wav(&Signal::new(vec![], 8000).unwrap(), &empty).unwrap();
        let back = read_wav(&empty).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.sample_rate(), 8000);
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let s = Signal::new(vec![0.0], 16000).unwrap();
        assert!(write_wav(&s, "/nonexistent-dir/x.wav").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_within_one_step(values in prop::collection::vec(-1.0f64..0.99996, 0..200)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("rt.wav");
            let s = Signal::new(values.clone(), 16000).unwrap();
            write_wav(&s, &path).unwrap();
            let back = read_wav(&path).unwrap();
            prop_assert_eq!(back.len(), values.len());
            for (a, b) in values.iter().zip(back.samples()) {
                prop_assert!((a - b).abs() < 1.0 / 32768.0);
            }
        }
    }
}
