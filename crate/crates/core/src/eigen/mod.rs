//! Normalized pitch-synchronous residual frames and their PCA basis
//! (eigenresiduals): dataset extraction, decomposition, order selection,
//! projection and reconstruction.

mod io;
mod pca;
mod train;

pub use io::{information_rate_csv, load_model, read_model, save_model, write_eigenresidual_csv, write_model};
pub use pca::compute_pca;
pub use train::{train_model, KSelection, TrainConfig, TrainReport};

use crate::error::{Error, Result};
use crate::pitch::GciList;
use crate::signal::{dot, l2_norm, resample_frame, two_period_window, Frame, Signal};

/// Normalized frame length for a normalized pitch: two periods, forced even.
pub fn frame_length(sample_rate: u32, f0_star: f64) -> usize {
    2 * ((sample_rate as f64 / f0_star).round() as usize).max(1)
}

/// Where a dataset row came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOrigin {
    pub utterance: u32,
    pub gci: usize,
    /// Local period in samples at extraction time.
    pub period: usize,
    /// L2 norm of the windowed frame before normalization.
    pub gain: f64,
}

/// Output of [`extract_frames`] for one utterance.
#[derive(Debug, Clone, Default)]
pub struct FrameExtraction {
    pub m: usize,
    pub frames: Vec<Frame>,
    pub origins: Vec<FrameOrigin>,
    /// GCIs whose two-period window left the signal or carried no energy.
    pub skipped: usize,
}

/// GCI-centered, two-period, Hann-windowed residual frames, resampled to `m`
/// points and scaled to unit energy.
///
/// For a GCI with local period `T` the cut is `residual[gci-T .. gci+T)`.
/// The recorded gain is the L2 norm of the windowed cut at its original
/// length, so a synthesis frame rescaled to that norm carries the analyzed
/// energy. Cuts that leave the signal or have gain below `1e-6` are skipped.
pub fn extract_frames(residual: &Signal, gcis: &GciList, f0_star: f64, utterance: u32) -> Result<FrameExtraction> {
    if !(f0_star > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "normalized pitch {f0_star} must be positive"
        )));
    }
    let m = frame_length(residual.sample_rate(), f0_star);
    let x = residual.samples();
    let mut out = FrameExtraction {
        m,
        ..Default::default()
    };
    for gci in &gcis.gcis {
        let period = gci.period.round() as usize;
        if period < 1 || gci.index < period || gci.index + period > x.len() {
            out.skipped += 1;
            continue;
        }
        let cut = Frame::new(x[gci.index - period..gci.index + period].to_vec());
        let windowed = cut.windowed(&two_period_window(period)?);
        let gain = windowed.norm();
        if gain < 1e-6 {
            out.skipped += 1;
            continue;
        }
        let resampled = if windowed.len() >= 2 {
            resample_frame(&windowed, m)?
        } else {
            out.skipped += 1;
            continue;
        };
        let norm = resampled.norm();
        if norm < 1e-12 {
            out.skipped += 1;
            continue;
        }
        out.frames.push(resampled.scaled(1.0 / norm));
        out.origins.push(FrameOrigin {
            utterance,
            gci: gci.index,
            period,
            gain,
        });
    }
    Ok(out)
}

/// The PCA input: `N` unit-energy rows of even length `m`.
#[derive(Debug, Clone)]
pub struct ResidualFrameSet {
    pub sample_rate: u32,
    pub f0_star: f64,
    m: usize,
    data: Vec<f64>,
    origins: Vec<FrameOrigin>,
}

impl ResidualFrameSet {
    pub fn new(sample_rate: u32, f0_star: f64, m: usize) -> Result<Self> {
        if m < 2 || m % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "frame length {m} must be even and >= 2"
            )));
        }
        Ok(ResidualFrameSet {
            sample_rate,
            f0_star,
            m,
            data: Vec::new(),
            origins: Vec::new(),
        })
    }

    pub fn push(&mut self, frame: &Frame, origin: FrameOrigin) -> Result<()> {
        if frame.len() != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                actual: frame.len(),
            });
        }
        if frame.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite frame".into()));
        }
        let norm = frame.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("frame norm {norm} is not 1")));
        }
        self.data.extend_from_slice(frame.as_slice());
        self.origins.push(origin);
        Ok(())
    }

    pub fn extend(&mut self, extraction: &FrameExtraction) -> Result<()> {
        for (f, o) in extraction.frames.iter().zip(&extraction.origins) {
            self.push(f, *o)?;
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.m)
    }

    pub fn origins(&self) -> &[FrameOrigin] {
        &self.origins
    }

    pub(crate) fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Mean residual frame, orthonormal eigenresiduals (rows) and their
/// eigenvalues in non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenModel {
    pub sample_rate: u32,
    pub f0_star: f64,
    m: usize,
    mean: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenresiduals: Vec<f64>,
    k_default: usize,
}

impl EigenModel {
    /// Assembles a model, checking shapes, ordering and orthonormality.
    pub fn from_parts(
        sample_rate: u32,
        f0_star: f64,
        mean: Vec<f64>,
        eigenvalues: Vec<f64>,
        eigenresiduals: Vec<f64>,
        k_default: usize,
    ) -> Result<Self> {
        let m = mean.len();
        let r = eigenvalues.len();
        if m < 2 || eigenresiduals.len() != r * m || r > m {
            return Err(Error::InvalidArgument(format!(
                "inconsistent model shapes: m={m}, r={r}, basis={}",
                eigenresiduals.len()
            )));
        }
        if k_default > r {
            return Err(Error::InvalidArgument(format!("k_default {k_default} exceeds r={r}")));
        }
        let all = mean.iter().chain(&eigenvalues).chain(&eigenresiduals);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite model payload".into()));
        }
        if eigenvalues.iter().any(|&l| l < 0.0) || eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be non-negative and non-increasing".into(),
            ));
        }
        let model = EigenModel {
            sample_rate,
            f0_star,
            m,
            mean,
            eigenvalues,
            eigenresiduals,
            k_default,
        };
        let err = model.orthonormality_error();
        if err > 1e-8 {
            return Err(Error::InvalidArgument(format!("basis not orthonormal (error {err:e})")));
        }
        Ok(model)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of stored components.
    pub fn r(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn k_default(&self) -> usize {
        self.k_default
    }

    pub fn set_k_default(&mut self, k: usize) -> Result<()> {
        if k > self.r() {
            return Err(Error::InvalidArgument(format!("k={k} exceeds r={}", self.r())));
        }
        self.k_default = k;
        Ok(())
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The `i`-th eigenresidual, 0-based.
    pub fn eigenresidual(&self, i: usize) -> &[f64] {
        &self.eigenresiduals[i * self.m..(i + 1) * self.m]
    }

    pub(crate) fn basis(&self) -> &[f64] {
        &self.eigenresiduals
    }

    /// Largest `|<mu_i, mu_j> - delta_ij|` over all pairs.
    pub fn orthonormality_error(&self) -> f64 {
        let r = self.r();
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in i..r {
                let d = dot(self.eigenresidual(i), self.eigenresidual(j));
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }

    pub fn information_rate(&self, k: usize) -> Result<f64> {
        information_rate(&self.eigenvalues, k)
    }

    pub fn select_k(&self, threshold: f64) -> Result<usize> {
        select_k(&self.eigenvalues, threshold)
    }

    /// `c_i = <frame - mean, mu_i>` for the first `k` eigenresiduals.
    pub fn project(&self, frame: &[f64], k: usize) -> Result<Vec<f64>> {
        if frame.len() != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                actual: frame.len(),
            });
        }
        if k > self.r() {
            return Err(Error::InvalidArgument(format!("k={k} exceeds r={}", self.r())));
        }
        let centered: Vec<f64> = frame.iter().zip(&self.mean).map(|(f, m)| f - m).collect();
        Ok((0..k).map(|i| dot(&centered, self.eigenresidual(i))).collect())
    }

    /// `mean + sum c_i mu_i`, without renormalization.
    pub fn reconstruct_raw(&self, coefficients: &[f64]) -> Result<Vec<f64>> {
        if coefficients.len() > self.r() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients exceed r={}",
                coefficients.len(),
                self.r()
            )));
        }
        let mut out = self.mean.clone();
        for (i, c) in coefficients.iter().enumerate() {
            for (o, mu) in out.iter_mut().zip(self.eigenresidual(i)) {
                *o += c * mu;
            }
        }
        Ok(out)
    }

    /// Reconstruction rescaled to unit L2 norm.
    pub fn reconstruct(&self, coefficients: &[f64]) -> Result<Frame> {
        let raw = self.reconstruct_raw(coefficients)?;
        let norm = l2_norm(&raw);
        Ok(if norm > 0.0 {
            Frame::new(raw.into_iter().map(|v| v / norm).collect())
        } else {
            Frame::new(raw)
        })
    }
}

/// Fraction of total dispersion carried by the first `k` eigenvalues.
///
/// `I(0) = 0`; when the total is zero every `k` gives 1.
pub fn information_rate(eigenvalues: &[f64], k: usize) -> Result<f64> {
    if k > eigenvalues.len() {
        return Err(Error::InvalidArgument(format!(
            "k={k} out of range 0..={}",
            eigenvalues.len()
        )));
    }
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Ok(1.0);
    }
    let head: f64 = eigenvalues[..k].iter().sum();
    Ok(head / total)
}

/// Smallest `k` with `I(k) >= threshold`.
pub fn select_k(eigenvalues: &[f64], threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside (0, 1]")));
    }
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Ok(0);
    }
    let mut head = 0.0;
    for (k, l) in eigenvalues.iter().enumerate() {
        if head / total >= threshold {
            return Ok(k);
        }
        head += l;
    }
    Ok(eigenvalues.len())
}
