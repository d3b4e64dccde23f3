use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{hanning_window, Signal};

const FRAME_SECS: f64 = 0.025;
const HOP_SECS: f64 = 0.005;
const MAX_HZ: f64 = 5000.0;
const FLOOR_DB: f64 = -80.0;

/// Mean log-spectral distortion in dB over voiced frames.
///
/// Frames are 25 ms Hann windows every 5 ms, kept when the mask marks their
/// center voiced. Each frame of `b` is rescaled to the energy of the matching
/// frame of `a`, and magnitudes below -80 dB relative to the frame's spectral
/// peak are floored. The per-frame RMS of the dB difference over 0-5 kHz is
/// averaged across frames.
pub fn log_spectral_distortion(a: &Signal, b: &Signal, voiced_mask: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if voiced_mask.len() != a.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: voiced_mask.len(),
        });
    }
    if a.sample_rate() != b.sample_rate() {
        return Err(Error::SampleRateMismatch {
            expected: a.sample_rate(),
            actual: b.sample_rate(),
        });
    }
    let sr = a.sample_rate() as f64;
    let len = (FRAME_SECS * sr).round() as usize;
    let hop = ((HOP_SECS * sr).round() as usize).max(1);
    let nfft = len.next_power_of_two();
    let bins = ((MAX_HZ * nfft as f64 / sr).floor() as usize).min(nfft / 2) + 1;
    let window = hanning_window(len)?;
    let fft = FftPlanner::new().plan_fft_forward(nfft);

    let spectrum = |x: &[f64], gain: f64| -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = x
            .iter()
            .zip(window.as_slice())
            .map(|(v, w)| Complex::new(v * w * gain, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(nfft)
            .collect();
        fft.process(&mut buf);
        buf[..bins].iter().map(|c| c.norm()).collect()
    };
    let energy = |x: &[f64]| -> f64 { x.iter().zip(window.as_slice()).map(|(v, w)| (v * w).powi(2)).sum() };

    let (xa, xb) = (a.samples(), b.samples());
    let mut total = 0.0;
    let mut frames = 0usize;
    let mut start = 0;
    while start + len <= xa.len() {
        let center = start + len / 2;
        let (fa, fb) = (&xa[start..start + len], &xb[start..start + len]);
        start += hop;
        if !voiced_mask[center] {
            continue;
        }
        let (ea, eb) = (energy(fa), energy(fb));
        if ea == 0.0 {
            // alignment silences b too
            frames += 1;
            continue;
        }
        let gain = if eb > 0.0 { (ea / eb).sqrt() } else { 1.0 };
        let sa = spectrum(fa, 1.0);
        let sb = spectrum(fb, gain);
        let peak = sa.iter().chain(&sb).cloned().fold(0.0, f64::max);
        let floor = peak * 10f64.powf(FLOOR_DB / 20.0);
        let sq: f64 = sa
            .iter()
            .zip(&sb)
            .map(|(p, q)| (20.0 * (p.max(floor) / q.max(floor)).log10()).powi(2))
            .sum();
        total += (sq / bins as f64).sqrt();
        frames += 1;
    }
    if frames == 0 {
        return Err(Error::NoVoicedFrames);
    }
    Ok(total / frames as f64)
}
