use super::{ParameterTrack, SynthConfig, UnvoicedGainMode};
use crate::eigen::EigenModel;
use crate::error::{Error, Result};
use crate::pitch::F0Track;
use crate::signal::{add_frame, resample_frame, white_noise, Signal};

const CROSSFADE_SECS: f64 = 0.002;

/// Eigenresidual excitation.
///
/// Each voiced record is reconstructed from its coefficients, resampled from
/// `m` to two local periods, rescaled to the record gain and overlap-added
/// at its GCI. Frames longer than `2m` (F0 below half the normalized pitch)
/// are clamped to `2m` with a warning.
pub fn build_excitation_eigen(track: &ParameterTrack, model: &EigenModel, cfg: &SynthConfig) -> Result<Signal> {
    track.validate()?;
    if track.sample_rate != model.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: model.sample_rate,
            actual: track.sample_rate,
        });
    }
    if track.k > model.r() {
        return Err(Error::InvalidArgument(format!(
            "track order k={} exceeds model r={}",
            track.k,
            model.r()
        )));
    }
    let sr = track.sample_rate as f64;
    let m = model.m();
    let mut voiced = vec![0.0; track.n_samples];
    let mut clamped = 0;
    for rec in &track.voiced {
        let mut len = 2 * ((sr / rec.f0).round() as usize).max(1);
        if len > 2 * m {
            clamped += 1;
            len = 2 * m;
        }
        let frame = resample_frame(&model.reconstruct(&rec.coefficients)?, len)?;
        let norm = frame.norm();
        if norm > 0.0 {
            add_frame(
                &mut voiced,
                frame.scaled(rec.gain / norm).as_slice(),
                gci_sample(rec.gci_time, sr),
            );
        }
    }
    if clamped > 0 {
        log::warn!(
            "{clamped} voiced records below F0*/2 ({:.1} Hz); period clamped",
            model.f0_star / 2.0
        );
    }
    Ok(mix(track, voiced, cfg))
}

/// Pulse-train excitation: one impulse of amplitude `gain` per voiced record.
pub fn build_excitation_pulse(track: &ParameterTrack, cfg: &SynthConfig) -> Result<Signal> {
    track.validate()?;
    let sr = track.sample_rate as f64;
    let mut voiced = vec![0.0; track.n_samples];
    for rec in &track.voiced {
        let t = gci_sample(rec.gci_time, sr);
        if (0..voiced.len() as isize).contains(&t) {
            voiced[t as usize] += rec.gain;
        }
    }
    Ok(mix(track, voiced, cfg))
}

/// Closure instants in seconds for a generated F0 contour: starting at the first
/// sample of each voiced run, step by the local period `Fs / f0`.
pub fn gci_times_from_f0(f0: &F0Track, n_samples: usize) -> Vec<f64> {
    let sr = f0.sample_rate as f64;
    let mask = f0.voiced_mask(n_samples);
    let mut times = Vec::new();
    let mut t = 0usize;
    while t < n_samples {
        if !mask[t] {
            t += 1;
            continue;
        }
        let mut pos = t as f64;
        loop {
            let i = pos.round() as usize;
            if i >= n_samples || !mask[i] {
                break;
            }
            times.push(pos / sr);
            let hz = f0.frame_at(i).map(|f| f.f0).unwrap_or(0.0);
            if hz <= 0.0 {
                break;
            }
            pos += sr / hz;
        }
        t = pos.round() as usize;
        while t < n_samples && mask[t] {
            t += 1;
        }
    }
    times
}

fn gci_sample(time: f64, sr: f64) -> isize {
    (time * sr).round() as isize
}

/// Fades `voiced` out and seeded noise in across the unvoiced segments.
///
/// The noise weight is the unvoiced indicator smoothed by a 2 ms moving
/// average, which makes a linear cross-fade centered on every boundary.
fn mix(track: &ParameterTrack, voiced: Vec<f64>, cfg: &SynthConfig) -> Signal {
    let n = track.n_samples;
    let hop = track.hop();
    let mut gain = vec![f64::NAN; n];
    for seg in &track.unvoiced {
        for t in seg.start..seg.end {
            gain[t] = match cfg.unvoiced_gain_mode {
                UnvoicedGainMode::Analysis => seg.gains[(t - seg.start) / hop],
                UnvoicedGainMode::Unit => 1.0,
            };
        }
    }
    let weight = smoothed_indicator(
        &gain,
        ((CROSSFADE_SECS * track.sample_rate as f64).round() as usize).max(1),
    );
    fill_from_nearest(&mut gain);

    let noise = white_noise(n, cfg.noise_seed);
    let out = (0..n)
        .map(|t| (1.0 - weight[t]) * voiced[t] + weight[t] * gain[t] * noise.as_slice()[t])
        .collect();
    Signal::new(out, track.sample_rate).expect("finite excitation")
}

/// Moving average of `!gain.is_nan()` over `width` samples, edge-extended.
fn smoothed_indicator(gain: &[f64], width: usize) -> Vec<f64> {
    let n = gain.len();
    if n == 0 {
        return Vec::new();
    }
    let ind = |t: isize| -> f64 {
        let t = t.clamp(0, n as isize - 1) as usize;
        if gain[t].is_nan() {
            0.0
        } else {
            1.0
        }
    };
    let lo = -((width / 2) as isize);
    let mut acc: f64 = (lo..lo + width as isize).map(ind).sum();
    let mut out = Vec::with_capacity(n);
    for t in 0..n as isize {
        out.push(acc / width as f64);
        acc += ind(t + lo + width as isize) - ind(t + lo);
    }
    out
}

/// Replaces NaN gaps with the nearest defined value (0 if none).
fn fill_from_nearest(gain: &mut [f64]) {
    let n = gain.len();
    let mut left = vec![None; n];
    let mut last = None;
    for t in 0..n {
        if !gain[t].is_nan() {
            last = Some((t, gain[t]));
        }
        left[t] = last;
    }
    let mut next: Option<(usize, f64)> = None;
    for t in (0..n).rev() {
        if !gain[t].is_nan() {
            next = Some((t, gain[t]));
            continue;
        }
        gain[t] = match (left[t], next) {
            (Some((a, ga)), Some((b, gb))) => {
                if t - a <= b - t {
                    ga
                } else {
                    gb
                }
            }
            (Some((_, g)), None) | (None, Some((_, g))) => g,
            (None, None) => 0.0,
        };
    }
}
