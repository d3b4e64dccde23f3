//! Shared DSP substrate: the [`Signal`] and [`Frame`] carriers, 16-bit WAV
//! I/O, Hann windows, band-limited frame resampling, seeded Gaussian noise and
//! overlap-add.

mod noise;
mod ola;
mod resample;
mod wav;
mod window;

pub use noise::white_noise;
pub(crate) use ola::add_frame;
pub use ola::{frame_center, overlap_add};
pub use resample::resample_frame;
pub use wav::{read_wav, write_wav};
pub use window::{hamming_window, hanning_window, two_period_window};

use crate::error::{Error, Result};

/// Mono audio at a known sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidSignal("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSignal(format!("non-finite sample at index {i}")));
        }
        Ok(Signal { samples, sample_rate })
    }

    pub fn zeros(len: usize, sample_rate: u32) -> Result<Self> {
        Signal::new(vec![0.0; len], sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn scaled(&self, gain: f64) -> Signal {
        Signal {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// A fixed-length block of samples with no attached rate.
///
/// The center of a frame is at index `len / 2`; see [`frame_center`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame(Vec<f64>);

impl Frame {
    pub fn new(samples: Vec<f64>) -> Self {
        Frame(samples)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }

    /// Elementwise product with another frame of the same length.
    pub fn windowed(&self, window: &Frame) -> Frame {
        debug_assert_eq!(self.len(), window.len());
        Frame(self.0.iter().zip(&window.0).map(|(a, b)| a * b).collect())
    }

    pub fn scaled(&self, gain: f64) -> Frame {
        Frame(self.0.iter().map(|s| s * gain).collect())
    }
}

impl From<Vec<f64>> for Frame {
    fn from(v: Vec<f64>) -> Self {
        Frame(v)
    }
}

impl AsRef<[f64]> for Frame {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
