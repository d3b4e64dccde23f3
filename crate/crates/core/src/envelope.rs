//! All-pole spectral envelope: LPC analysis, inverse filtering to obtain the
//! residual, and the matching synthesis filter.
//!
//! Filters use `A(z) = 1 + a_1 z^-1 + ... + a_p z^-p`. Coefficients are
//! interpolated linearly between hop records; for the FIR inverse filter this
//! is the same as a triangular cross-fade of the two adjacent filters'
//! outputs, and the synthesis filter uses the identical schedule so the two
//! invert each other exactly.

use crate::error::{Error, Result};
use crate::signal::{hamming_window, Signal};

/// Which envelope model produced a track. Only LPC is implemented; the tag is
/// serialized so other backends can share the track format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvelopeKind {
    #[default]
    Lpc,
}

impl EnvelopeKind {
    pub fn code(self) -> u8 {
        match self {
            EnvelopeKind::Lpc => 0,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(EnvelopeKind::Lpc),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeConfig {
    pub order: usize,
    pub frame_len_ms: f64,
    pub hop_ms: f64,
    /// First-order pre-emphasis coefficient in `[0, 1)`; 0 disables it.
    pub pre_emphasis: f64,
    pub kind: EnvelopeKind,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        EnvelopeConfig {
            order: 24,
            frame_len_ms: 25.0,
            hop_ms: 5.0,
            pre_emphasis: 0.0,
            kind: EnvelopeKind::Lpc,
        }
    }
}

impl EnvelopeConfig {
    pub fn frame_len(&self, sample_rate: u32) -> usize {
        (self.frame_len_ms * 1e-3 * sample_rate as f64).round() as usize
    }

    pub fn hop_len(&self, sample_rate: u32) -> usize {
        (self.hop_ms * 1e-3 * sample_rate as f64).round() as usize
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let frame = self.frame_len(sample_rate);
        let hop = self.hop_len(sample_rate);
        if self.order == 0 || self.order >= frame {
            return Err(Error::InvalidConfig(format!(
                "envelope order {} must be in 1..{frame}",
                self.order
            )));
        }
        if hop == 0 || hop > frame {
            return Err(Error::InvalidConfig(format!(
                "envelope hop {hop} must be in 1..={frame} samples"
            )));
        }
        if !(0.0..1.0).contains(&self.pre_emphasis) {
            return Err(Error::InvalidConfig(format!(
                "pre-emphasis {} outside [0, 1)",
                self.pre_emphasis
            )));
        }
        Ok(())
    }
}

/// One LPC analysis result.
#[derive(Debug, Clone, PartialEq)]
pub struct Lpc {
    /// `a_0 = 1, a_1 .. a_p`.
    pub coefficients: Vec<f64>,
    /// Square root of the prediction error energy.
    pub gain: f64,
    pub reflection: Vec<f64>,
    pub silent: bool,
}

impl Lpc {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Forward-predictor coefficients `x[n] ~ sum p_i x[n-i]`, i.e. `-a_i`.
    pub fn predictor(&self) -> Vec<f64> {
        self.coefficients[1..].iter().map(|a| -a).collect()
    }
}

/// Autocorrelation-method LPC via Levinson-Durbin on an already windowed frame.
///
/// An all-zero frame yields zero coefficients, zero gain and `silent = true`.
pub fn lpc_analyze(frame: &[f64], order: usize) -> Result<Lpc> {
    if frame.len() <= order {
        return Err(Error::InvalidArgument(format!(
            "frame of {} samples cannot support order {order}",
            frame.len()
        )));
    }
    let r = autocorrelation(frame, order);
    Ok(levinson(&r, order))
}

fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| x[lag..].iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn levinson(r: &[f64], order: usize) -> Lpc {
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    if r[0] <= f64::MIN_POSITIVE {
        return Lpc {
            coefficients: a,
            gain: 0.0,
            reflection: vec![0.0; order],
            silent: true,
        };
    }
    let mut err = r[0];
    let mut reflection = vec![0.0; order];
    let mut prev = a.clone();
    for i in 1..=order {
        let acc: f64 = r[i] + (1..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = -acc / err;
        // ill-conditioned input (e.g. a pure sinusoid): keep the stable prefix
        if !k.is_finite() || k.abs() >= 1.0 {
            break;
        }
        prev[..i].copy_from_slice(&a[..i]);
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        reflection[i - 1] = k;
        err *= 1.0 - k * k;
    }
    Lpc {
        coefficients: a,
        gain: err.max(0.0).sqrt(),
        reflection,
        silent: false,
    }
}

/// Converts `A(z)` coefficients back to reflection coefficients (step-down).
/// Returns `None` when some reflection coefficient has magnitude `>= 1`.
pub fn reflection_coefficients(coefficients: &[f64]) -> Option<Vec<f64>> {
    let p = coefficients.len().saturating_sub(1);
    let mut a = coefficients.to_vec();
    let mut k = vec![0.0; p];
    for m in (1..=p).rev() {
        let km = a[m];
        if !km.is_finite() || km.abs() >= 1.0 {
            return None;
        }
        k[m - 1] = km;
        let denom = 1.0 - km * km;
        let prev = a.clone();
        for i in 1..m {
            a[i] = (prev[i] - km * prev[m - i]) / denom;
        }
    }
    Some(k)
}

/// Per-hop envelope records; record `i` describes the signal around sample
/// `i * hop`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTrack {
    pub hop: usize,
    pub order: usize,
    pub records: Vec<EnvelopeRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeRecord {
    pub coefficients: Vec<f64>,
    pub gain: f64,
}

impl EnvelopeTrack {
    /// Number of records needed to cover `len` samples at hop `hop`.
    pub fn records_for(len: usize, hop: usize) -> usize {
        len.div_ceil(hop) + 1
    }

    /// A track whose filters are all the identity.
    pub fn flat(len: usize, hop: usize, order: usize) -> Self {
        let mut coefficients = vec![0.0; order + 1];
        coefficients[0] = 1.0;
        EnvelopeTrack {
            hop,
            order,
            records: vec![
                EnvelopeRecord {
                    coefficients,
                    gain: 0.0
                };
                Self::records_for(len, hop)
            ],
        }
    }

    /// A track repeating one fixed filter.
    pub fn constant(len: usize, hop: usize, coefficients: Vec<f64>) -> Self {
        let order = coefficients.len() - 1;
        EnvelopeTrack {
            hop,
            order,
            records: vec![
                EnvelopeRecord {
                    coefficients,
                    gain: 1.0
                };
                Self::records_for(len, hop)
            ],
        }
    }

    fn check_covers(&self, len: usize) -> Result<()> {
        let needed = Self::records_for(len, self.hop);
        if self.records.len() < needed {
            return Err(Error::LengthMismatch {
                expected: needed,
                actual: self.records.len(),
            });
        }
        Ok(())
    }

    fn interpolated(&self, t: usize, out: &mut [f64]) {
        let i = t / self.hop;
        let alpha = (t % self.hop) as f64 / self.hop as f64;
        let lo = &self.records[i].coefficients;
        let hi = &self.records[(i + 1).min(self.records.len() - 1)].coefficients;
        for ((o, a), b) in out.iter_mut().zip(lo).zip(hi) {
            *o = (1.0 - alpha) * a + alpha * b;
        }
    }
}

/// Frame-by-frame LPC analysis at the configured hop.
///
/// Analysis frames are centered on `i * hop`, zero-padded at the signal
/// edges, optionally pre-emphasized, and Hamming-windowed.
pub fn analyze_envelope(signal: &Signal, cfg: &EnvelopeConfig) -> Result<EnvelopeTrack> {
    let sr = signal.sample_rate();
    cfg.validate(sr)?;
    let frame_len = cfg.frame_len(sr);
    let hop = cfg.hop_len(sr);
    let window = hamming_window(frame_len)?;
    let x = pre_emphasize(signal.samples(), cfg.pre_emphasis);
    let n = x.len() as isize;
    let half = (frame_len / 2) as isize;

    let mut buf = vec![0.0; frame_len];
    let records = (0..EnvelopeTrack::records_for(x.len(), hop))
        .map(|i| {
            let start = (i * hop) as isize - half;
            for (j, (b, w)) in buf.iter_mut().zip(window.as_slice()).enumerate() {
                let t = start + j as isize;
                *b = if (0..n).contains(&t) { x[t as usize] * w } else { 0.0 };
            }
            let lpc = lpc_analyze(&buf, cfg.order)?;
            Ok(EnvelopeRecord {
                coefficients: lpc.coefficients,
                gain: lpc.gain,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnvelopeTrack {
        hop,
        order: cfg.order,
        records,
    })
}

/// Applies `A(z)` (after optional pre-emphasis) to obtain the residual.
///
/// The gain is not divided out; the residual keeps its natural energy.
pub fn inverse_filter(signal: &Signal, track: &EnvelopeTrack, cfg: &EnvelopeConfig) -> Result<Signal> {
    track.check_covers(signal.len())?;
    let x = pre_emphasize(signal.samples(), cfg.pre_emphasis);
    let p = track.order;
    let mut a = vec![0.0; p + 1];
    let out = (0..x.len())
        .map(|t| {
            track.interpolated(t, &mut a);
            let mut acc = x[t];
            for j in 1..=p.min(t) {
                acc += a[j] * x[t - j];
            }
            acc
        })
        .collect();
    Signal::new(out, signal.sample_rate())
}

/// Applies `1/A(z)` (then optional de-emphasis) to an excitation.
pub fn synth_filter(excitation: &Signal, track: &EnvelopeTrack, cfg: &EnvelopeConfig) -> Result<Signal> {
    track.check_covers(excitation.len())?;
    let needed = EnvelopeTrack::records_for(excitation.len(), track.hop);
    for (i, rec) in track.records[..needed].iter().enumerate() {
        if reflection_coefficients(&rec.coefficients).is_none() {
            return Err(Error::UnstableFilter(i));
        }
    }
    let x = excitation.samples();
    let p = track.order;
    let mut a = vec![0.0; p + 1];
    let mut y = vec![0.0; x.len()];
    for t in 0..x.len() {
        track.interpolated(t, &mut a);
        let mut acc = x[t];
        for j in 1..=p.min(t) {
            acc -= a[j] * y[t - j];
        }
        y[t] = acc;
    }
    if cfg.pre_emphasis > 0.0 {
        for t in 1..y.len() {
            y[t] += cfg.pre_emphasis * y[t - 1];
        }
    }
    Signal::new(y, excitation.sample_rate())
}

fn pre_emphasize(x: &[f64], coef: f64) -> Vec<f64> {
    if coef == 0.0 {
        return x.to_vec();
    }
    let mut out = Vec::with_capacity(x.len());
    let mut prev = 0.0;
    for &v in x {
        out.push(v - coef * prev);
        prev = v;
    }
    out
}
