use std::f64::consts::PI;

use super::Frame;
use crate::error::{Error, Result};

/// Symmetric Hann window, `w(j) = 0.5 (1 - cos(2 pi j / (n - 1)))`.
///
/// A single-point window is `[1.0]`.
pub fn hanning_window(n: usize) -> Result<Frame> {
    symmetric_cosine(n, 0.5, 0.5)
}

/// Hann window spanning two pitch periods, anchored on its center sample.
///
/// This is `hanning_window(2 * period + 1)` with its trailing zero dropped, so
/// the peak sits exactly at index `period` (the frame center) and copies
/// placed every `period` samples sum to one.
pub fn two_period_window(period: usize) -> Result<Frame> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    let mut w = hanning_window(2 * period + 1)?.into_vec();
    w.pop();
    Ok(Frame::new(w))
}

/// Symmetric Hamming window used by the envelope analysis.
pub fn hamming_window(n: usize) -> Result<Frame> {
    symmetric_cosine(n, 0.54, 0.46)
}

fn symmetric_cosine(n: usize, a0: f64, a1: f64) -> Result<Frame> {
    match n {
        0 => Err(Error::InvalidArgument("window length must be positive".into())),
        1 => Ok(Frame::new(vec![1.0])),
        _ => {
            let denom = (n - 1) as f64;
            let mut w: Vec<f64> = (0..n).map(|j| a0 - a1 * (2.0 * PI * j as f64 / denom).cos()).collect();
            // mirror so w(j) == w(n-1-j) bit for bit
            for j in 0..n / 2 {
                w[n - 1 - j] = w[j];
            }
            Ok(Frame::new(w))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_hann_windows() {
        let w3 = hanning_window(3).unwrap();
        assert_eq!(w3.as_slice(), &[0.0, 1.0, 0.0]);

        let w5 = hanning_window(5).unwrap();
        for (got, want) in w5.as_slice().iter().zip([0.0, 0.5, 1.0, 0.5, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }

        // 0.5 (1 - cos(2 pi / 3)) = 0.75
        let w4 = hanning_window(4).unwrap();
        for (got, want) in w4.as_slice().iter().zip([0.0, 0.75, 0.75, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_lengths() {
        assert_eq!(hanning_window(1).unwrap().as_slice(), &[1.0]);
        assert!(hanning_window(0).is_err());
    }

    #[test]
    fn two_period_window_peaks_at_center() {
        let w = two_period_window(100).unwrap();
        assert_eq!(w.len(), 200);
        assert_eq!(w.as_slice()[100], 1.0);
        assert_eq!(w.as_slice()[0], 0.0);
        assert_eq!(w.as_slice()[50], w.as_slice()[150]);
        assert!(two_period_window(0).is_err());
    }

    #[test]
    fn exact_symmetry() {
        for n in 1..200 {
            let w = hanning_window(n).unwrap();
            let s = w.as_slice();
            for j in 0..n {
                assert_eq!(s[j], s[n - 1 - j]);
            }
        }
    }
}
