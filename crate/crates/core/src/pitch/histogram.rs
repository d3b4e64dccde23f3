use super::F0Track;
use crate::error::{Error, Result};

/// Histogram of voiced F0 values with bins `[origin + i*w, origin + (i+1)*w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchHistogram {
    pub origin: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl PitchHistogram {
    /// Bins voiced values; `origin` is the largest multiple of `bin_width` not
    /// above the smallest value.
    pub fn from_values(values: &[f64], bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0) {
            return Err(Error::InvalidArgument("bin width must be positive".into()));
        }
        let values: Vec<f64> = values.iter().cloned().filter(|v| *v > 0.0).collect();
        if values.is_empty() {
            return Err(Error::NoVoicedFrames);
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let origin = (lo / bin_width).floor() * bin_width;
        let bins = ((hi - origin) / bin_width).floor() as usize + 1;
        let mut counts = vec![0u64; bins];
        for v in values {
            let i = (((v - origin) / bin_width).floor() as usize).min(bins - 1);
            counts[i] += 1;
        }
        Ok(PitchHistogram {
            origin,
            bin_width,
            counts,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.counts.len())
            .map(|i| self.origin + i as f64 * self.bin_width)
            .collect()
    }

    /// Empirical distribution `P(F0)` per bin; sums to one.
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Merges another histogram with the same bin width.
    pub fn merge(&self, other: &PitchHistogram) -> Result<PitchHistogram> {
        if self.bin_width != other.bin_width {
            return Err(Error::InvalidArgument("bin widths differ".into()));
        }
        let origin = self.origin.min(other.origin);
        let end = self.edges().last().unwrap().max(*other.edges().last().unwrap());
        let bins = ((end - origin) / self.bin_width).round() as usize;
        let mut counts = vec![0u64; bins];
        for h in [self, other] {
            let offset = ((h.origin - origin) / self.bin_width).round() as usize;
            for (i, c) in h.counts.iter().enumerate() {
                counts[offset + i] += c;
            }
        }
        Ok(PitchHistogram {
            origin,
            bin_width: self.bin_width,
            counts,
        })
    }
}

/// Histogram over the voiced frames of a track.
pub fn build_histogram(track: &F0Track, bin_width_hz: f64) -> Result<PitchHistogram> {
    let values: Vec<f64> = track.frames.iter().filter(|f| f.voiced).map(|f| f.f0).collect();
    PitchHistogram::from_values(&values, bin_width_hz)
}

/// Normalized pitch `F0*`: the value with `upper_mass` of the voiced-frame
/// distribution above it, i.e. its `(1 - upper_mass)` quantile, taking the
/// mass as uniform inside each bin.
///
/// With the default 0.8 only one frame in five has a higher pitch, so most
/// synthesis-time pitch conversions shorten the normalized frame.
pub fn normalized_pitch(hist: &PitchHistogram, upper_mass: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&upper_mass) {
        return Err(Error::InvalidArgument(format!(
            "upper mass {upper_mass} outside [0, 1]"
        )));
    }
    let total = hist.total();
    if total == 0 {
        return Err(Error::NoVoicedFrames);
    }
    let target = (1.0 - upper_mass) * total as f64;
    let mut below = 0.0;
    for (i, &c) in hist.counts.iter().enumerate() {
        let c = c as f64;
        if c > 0.0 && below + c >= target {
            let frac = ((target - below) / c).clamp(0.0, 1.0);
            return Ok(hist.origin + (i as f64 + frac) * hist.bin_width);
        }
        below += c;
    }
    Ok(hist.origin + hist.counts.len() as f64 * hist.bin_width)
}

/// Mass strictly above `f0` with uniform density inside each bin.
pub fn mass_above(hist: &PitchHistogram, f0: f64) -> f64 {
    let total = hist.total() as f64;
    hist.counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let lo = hist.origin + i as f64 * hist.bin_width;
            let hi = lo + hist.bin_width;
            let frac = ((hi - f0) / hist.bin_width).clamp(0.0, 1.0);
            c as f64 * frac
        })
        .sum::<f64>()
        / total
}
