use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, PartialEq)]
pub struct PitchConfig {
    pub f0_min: f64,
    pub f0_max: f64,
    pub hop_ms: f64,
    /// Correlation window length.
    pub frame_ms: f64,
    /// Minimum normalized-correlation peak for a voiced decision.
    pub voicing_threshold: f64,
    /// Frames quieter than this (dB relative to the loudest frame) are unvoiced.
    pub silence_db: f64,
    pub median_width: usize,
}

impl Default for PitchConfig {
    fn default() -> Self {
        PitchConfig {
            f0_min: 50.0,
            f0_max: 400.0,
            hop_ms: 5.0,
            frame_ms: 40.0,
            voicing_threshold: 0.3,
            silence_db: -50.0,
            median_width: 5,
        }
    }
}

impl PitchConfig {
    pub fn hop_len(&self, sample_rate: u32) -> usize {
        (self.hop_ms * 1e-3 * sample_rate as f64).round() as usize
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        if !(self.f0_min > 0.0 && self.f0_min < self.f0_max) {
            return Err(Error::InvalidConfig(format!(
                "f0 bounds [{}, {}] are not ordered and positive",
                self.f0_min, self.f0_max
            )));
        }
        if (sample_rate as f64) < 8.0 * self.f0_max {
            return Err(Error::InvalidConfig(format!(
                "sample rate {sample_rate} Hz is below 8 x f0_max"
            )));
        }
        if self.hop_len(sample_rate) == 0 || self.frame_ms <= 0.0 {
            return Err(Error::InvalidConfig("pitch hop and frame must be positive".into()));
        }
        if self.median_width == 0 {
            return Err(Error::InvalidConfig("median width must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F0Frame {
    pub time: f64,
    /// Hz; zero when unvoiced.
    pub f0: f64,
    pub voiced: bool,
}

/// Frame-rate F0 contour; frame `i` sits at sample `i * hop`.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    pub sample_rate: u32,
    pub hop: usize,
    pub frames: Vec<F0Frame>,
}

impl F0Track {
    /// Builds a track from per-hop F0 values (0 = unvoiced).
    pub fn from_values(sample_rate: u32, hop: usize, values: &[f64]) -> Self {
        let frames = values
            .iter()
            .enumerate()
            .map(|(i, &f0)| F0Frame {
                time: (i * hop) as f64 / sample_rate as f64,
                f0: if f0 > 0.0 { f0 } else { 0.0 },
                voiced: f0 > 0.0,
            })
            .collect();
        F0Track {
            sample_rate,
            hop,
            frames,
        }
    }

    /// The frame governing sample `t` (nearest hop center).
    pub fn frame_at(&self, t: usize) -> Option<&F0Frame> {
        let i = (t + self.hop / 2) / self.hop;
        self.frames.get(i.min(self.frames.len().saturating_sub(1)))
    }

    pub fn voiced_count(&self) -> usize {
        self.frames.iter().filter(|f| f.voiced).count()
    }

    /// Per-sample voicing for a signal of `len` samples.
    pub fn voiced_mask(&self, len: usize) -> Vec<bool> {
        (0..len).map(|t| self.frame_at(t).is_some_and(|f| f.voiced)).collect()
    }
}

/// Normalized cross-correlation pitch tracker.
///
/// Each hop correlates a `frame_ms` window against itself shifted over the
/// lag range implied by the F0 bounds. The first correlation peak within 90%
/// of the best one is taken (guards against picking a sub-octave), refined by
/// parabolic interpolation, and declared voiced when it exceeds the voicing
/// threshold and the frame is above the silence floor. A median filter then
/// smooths both the voicing decisions and the F0 values.
pub fn track_f0(signal: &Signal, cfg: &PitchConfig) -> Result<F0Track> {
    let sr = signal.sample_rate();
    cfg.validate(sr)?;
    let x = signal.samples();
    let hop = cfg.hop_len(sr);
    let win = ((cfg.frame_ms * 1e-3 * sr as f64).round() as usize).max(2);
    let min_lag = ((sr as f64 / cfg.f0_max).floor() as usize).max(2);
    let max_lag = (sr as f64 / cfg.f0_min).ceil() as usize;
    let n_frames = if x.is_empty() { 0 } else { (x.len() - 1) / hop + 1 };

    let starts: Vec<isize> = (0..n_frames)
        .map(|i| (i * hop) as isize - (win / 2) as isize - (max_lag / 2) as isize)
        .collect();
    let rms: Vec<f64> = starts
        .iter()
        .map(|&s| {
            let e: f64 = (0..win).map(|j| sample(x, s + j as isize).powi(2)).sum();
            (e / win as f64).sqrt()
        })
        .collect();
    let loudest = rms.iter().cloned().fold(0.0, f64::max);
    let floor = (loudest * 10f64.powf(cfg.silence_db / 20.0)).max(1e-7);

    let mut corr = Correlator::new(win, max_lag);
    let raw: Vec<Option<f64>> = starts
        .iter()
        .zip(&rms)
        .map(|(&s, &r)| {
            if r <= floor {
                return None;
            }
            let nccf = corr.nccf(x, s);
            pick_period(&nccf, min_lag, max_lag, cfg.voicing_threshold)
                .map(|lag| sr as f64 / lag)
                .filter(|f0| (cfg.f0_min..=cfg.f0_max).contains(f0))
        })
        .collect();

    let smoothed = median_smooth(&raw, cfg.median_width);
    let frames = smoothed
        .iter()
        .enumerate()
        .map(|(i, v)| F0Frame {
            time: (i * hop) as f64 / sr as f64,
            f0: v.unwrap_or(0.0),
            voiced: v.is_some(),
        })
        .collect();
    Ok(F0Track {
        sample_rate: sr,
        hop,
        frames,
    })
}

fn sample(x: &[f64], t: isize) -> f64 {
    if t >= 0 && (t as usize) < x.len() {
        x[t as usize]
    } else {
        0.0
    }
}

fn pick_period(nccf: &[f64], min_lag: usize, max_lag: usize, threshold: f64) -> Option<f64> {
    let hi = max_lag.min(nccf.len() - 2);
    let peaks: Vec<usize> = (min_lag.max(1)..=hi)
        .filter(|&l| nccf[l] > 0.0 && nccf[l] >= nccf[l - 1] && nccf[l] > nccf[l + 1])
        .collect();
    let best = peaks.iter().map(|&l| nccf[l]).fold(f64::NEG_INFINITY, f64::max);
    if !(best > threshold) {
        return None;
    }
    let lag = *peaks.iter().find(|&&l| nccf[l] >= 0.9 * best)?;
    let (a, b, c) = (nccf[lag - 1], nccf[lag], nccf[lag + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom.abs() > 1e-12 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Some(lag as f64 + offset)
}

fn median_smooth(raw: &[Option<f64>], width: usize) -> Vec<Option<f64>> {
    let half = width / 2;
    (0..raw.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(raw.len());
            let window = &raw[lo..hi];
            let mut voiced: Vec<f64> = window.iter().flatten().cloned().collect();
            if 2 * voiced.len() <= window.len() {
                return None;
            }
            voiced.sort_by(f64::total_cmp);
            let n = voiced.len();
            Some(if n % 2 == 1 {
                voiced[n / 2]
            } else {
                0.5 * (voiced[n / 2 - 1] + voiced[n / 2])
            })
        })
        .collect()
}

/// FFT-based normalized cross-correlation of a window against its lagged copies.
struct Correlator {
    win: usize,
    span: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    a: Vec<Complex<f64>>,
    b: Vec<Complex<f64>>,
    seg: Vec<f64>,
}

impl Correlator {
    fn new(win: usize, max_lag: usize) -> Self {
        let span = win + max_lag + 1;
        let size = (win + span).next_power_of_two();
        let mut planner = FftPlanner::new();
        Correlator {
            win,
            span,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
            a: vec![Complex::default(); size],
            b: vec![Complex::default(); size],
            seg: vec![0.0; span],
        }
    }

    /// `nccf[l] = sum x[n] x[n+l] / sqrt(sum x[n]^2 * sum x[n+l]^2)`, n < win.
    fn nccf(&mut self, x: &[f64], start: isize) -> Vec<f64> {
        let size = self.a.len();
        for (j, s) in self.seg.iter_mut().enumerate() {
            *s = sample(x, start + j as isize);
        }
        for j in 0..size {
            let v = if j < self.win { self.seg[j] } else { 0.0 };
            self.a[j] = Complex::new(v, 0.0);
            let w = if j < self.span { self.seg[j] } else { 0.0 };
            self.b[j] = Complex::new(w, 0.0);
        }
        self.forward.process(&mut self.a);
        self.forward.process(&mut self.b);
        for (a, b) in self.a.iter_mut().zip(&self.b) {
            *a = a.conj() * b;
        }
        self.inverse.process(&mut self.a);

        let mut prefix = vec![0.0; self.span + 1];
        for (j, s) in self.seg.iter().enumerate() {
            prefix[j + 1] = prefix[j] + s * s;
        }
        let e0 = prefix[self.win];
        let lags = self.span - self.win + 1;
        (0..lags)
            .map(|l| {
                let el = prefix[l + self.win] - prefix[l];
                let denom = (e0 * el).sqrt();
                if denom > 1e-20 {
                    self.a[l].re / size as f64 / denom
                } else {
                    0.0
                }
            })
            .collect()
    }
}
