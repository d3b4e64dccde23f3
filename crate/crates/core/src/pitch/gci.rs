use std::fmt::Write as _;

use super::F0Track;
use crate::signal::{hanning_window, Signal};

/// Which residual peaks mark closure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GciPolarity {
    /// Largest magnitude regardless of sign.
    #[default]
    Either,
    /// Negative-going peaks (modal voice LPC residuals).
    Negative,
    /// Positive-going peaks (polarity-inverted recordings).
    Positive,
}

impl GciPolarity {
    fn score(self, v: f64) -> f64 {
        match self {
            GciPolarity::Either => v.abs(),
            GciPolarity::Negative => -v,
            GciPolarity::Positive => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GciConfig {
    pub polarity: GciPolarity,
    /// CoG window length in local periods.
    pub cog_periods: f64,
    /// Peak search radius around a CoG crossing, in periods.
    pub refine_periods: f64,
    /// Candidates closer than this (in periods) are merged.
    pub merge_periods: f64,
}

impl Default for GciConfig {
    fn default() -> Self {
        GciConfig {
            polarity: GciPolarity::Either,
            cog_periods: 1.1,
            refine_periods: 0.25,
            merge_periods: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gci {
    pub index: usize,
    /// Local pitch period in samples.
    pub period: f64,
}

/// Glottal closure instants in increasing sample order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GciList {
    pub sample_rate: u32,
    pub gcis: Vec<Gci>,
}

impl GciList {
    pub fn len(&self) -> usize {
        self.gcis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gcis.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.gcis.iter().map(|g| g.index).collect()
    }

    /// One timestamp per line, seconds with six decimals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.gcis {
            let _ = writeln!(out, "{:.6}", g.index as f64 / self.sample_rate as f64);
        }
        out
    }
}

/// Energy center of gravity around `center`, in samples relative to it.
///
/// Uses a Hann window of `2 * (window_len / 2) + 1` taps; near the signal
/// edges the summation range shrinks symmetrically. Returns 0 when the
/// weighted energy is below `1e-12`.
pub fn compute_cog(signal: &[f64], center: usize, window_len: usize) -> f64 {
    let half = window_len / 2;
    let w = hanning_window(2 * half + 1).expect("window length is positive");
    cog_with_window(signal, center, w.as_slice())
}

fn cog_with_window(signal: &[f64], center: usize, w: &[f64]) -> f64 {
    let full = w.len() / 2;
    if center >= signal.len() {
        return 0.0;
    }
    let half = full.min(center).min(signal.len() - 1 - center);
    let mut num = 0.0;
    let mut den = 0.0;
    for n in -(half as isize)..=(half as isize) {
        let s = signal[(center as isize + n) as usize];
        let e = w[(full as isize + n) as usize] * s * s;
        num += n as f64 * e;
        den += e;
    }
    if den < 1e-12 {
        0.0
    } else {
        num / den
    }
}

/// Locates glottal closure instants in the voiced parts of a residual.
///
/// The energy CoG is evaluated at every sample with a window of about 1.1
/// local periods. Its positive-to-negative zero crossings mark candidates,
/// each is moved to the strongest residual peak within a quarter period, and
/// candidates closer than half a period are merged keeping the stronger peak.
pub fn detect_gci(residual: &Signal, f0: &F0Track, cfg: &GciConfig) -> GciList {
    let x = residual.samples();
    let sr = residual.sample_rate() as f64;
    let period_at = |t: usize| -> Option<f64> { f0.frame_at(t).filter(|f| f.voiced).map(|f| sr / f.f0) };

    let mut candidates: Vec<(usize, f64)> = Vec::new();
    let mut window_cache: Option<(usize, Vec<f64>)> = None;
    let mut prev: Option<f64> = None;
    for t in 0..x.len() {
        let Some(period) = period_at(t) else {
            prev = None;
            continue;
        };
        let half = ((cfg.cog_periods * period).round() as usize / 2).max(1);
        if window_cache.as_ref().map(|(h, _)| *h) != Some(half) {
            window_cache = Some((half, hanning_window(2 * half + 1).unwrap().into_vec()));
        }
        let w = &window_cache.as_ref().unwrap().1;
        let cog = cog_with_window(x, t, w);
        if let Some(p) = prev {
            if p > 0.0 && cog <= 0.0 {
                // crossing lies between t-1 and t; keep the sample nearer zero
                let at = if p < -cog { t - 1 } else { t };
                candidates.push((at, period));
            }
        }
        prev = Some(cog);
    }

    let mut refined: Vec<(usize, f64, f64)> = candidates
        .into_iter()
        .map(|(c, period)| {
            let r = (cfg.refine_periods * period).round() as usize;
            let lo = c.saturating_sub(r);
            let hi = (c + r).min(x.len() - 1);
            let mut best = c;
            for t in lo..=hi {
                if cfg.polarity.score(x[t]) > cfg.polarity.score(x[best]) {
                    best = t;
                }
            }
            (best, cfg.polarity.score(x[best]), period)
        })
        .collect();
    refined.sort_by_key(|c| c.0);

    let mut merged: Vec<(usize, f64, f64)> = Vec::with_capacity(refined.len());
    for cand in refined {
        match merged.last_mut() {
            Some(last) if ((cand.0 - last.0) as f64) < cfg.merge_periods * cand.2 => {
                if cand.1 > last.1 {
                    *last = cand;
                }
            }
            _ => merged.push(cand),
        }
    }

    let gcis = merged
        .into_iter()
        .map(|(index, _, period)| Gci {
            index,
            period: period_at(index).unwrap_or(period),
        })
        .collect();
    GciList {
        sample_rate: residual.sample_rate(),
        gcis,
    }
}
