use std::f64::consts::PI;
use std::sync::OnceLock;

use super::Frame;
use crate::error::{Error, Result};

/// Kernel half-width in output-rate taps.
const HALF_TAPS: f64 = 32.0;
const KAISER_BETA: f64 = 8.0;
const WINDOW_TABLE_LEN: usize = 8192;

/// Band-limited resampling of a frame onto `target_len` points.
///
/// The index axis `[0, len-1]` is mapped linearly onto `[0, target_len-1]`,
/// so both endpoints are preserved in position. Interpolation uses a
/// Kaiser-windowed sinc whose cutoff follows the output rate when shrinking
/// (anti-aliasing). The frame is extended past its ends by point reflection
/// about the endpoint samples, which continues linear trends without a step.
/// Energy is not renormalized.
pub fn resample_frame(frame: &Frame, target_len: usize) -> Result<Frame> {
    let src = frame.as_slice();
    let len = src.len();
    if len < 2 || target_len < 2 {
        return Err(Error::InvalidArgument(format!(
            "resample needs lengths >= 2 (got {len} -> {target_len})"
        )));
    }
    if target_len == len {
        return Ok(frame.clone());
    }

    let step = (len - 1) as f64 / (target_len - 1) as f64;
    // cutoff relative to the source Nyquist
    let cutoff = (1.0 / step).min(1.0);
    let half_width = HALF_TAPS / cutoff;

    let out = (0..target_len)
        .map(|i| {
            let x = i as f64 * step;
            let lo = (x - half_width).ceil() as isize;
            let hi = (x + half_width).floor() as isize;
            // sin(pi c u) stepped by angle addition as u falls by one per tap
            let (sin_step, cos_step) = (PI * cutoff).sin_cos();
            let (mut s, mut c) = (PI * cutoff * (x - lo as f64)).sin_cos();
            let mut acc = 0.0;
            for j in lo..=hi {
                let u = x - j as f64;
                let px = PI * cutoff * u;
                let sinc = if px.abs() < 1e-9 { 1.0 } else { s / px };
                acc += extended(src, j) * cutoff * sinc * kaiser(u / half_width);
                (s, c) = (s * cos_step - c * sin_step, c * cos_step + s * sin_step);
            }
            acc
        })
        .collect();
    Ok(Frame::new(out))
}

fn extended(src: &[f64], j: isize) -> f64 {
    let n = src.len() as isize;
    if j < 0 {
        let k = (-j).min(n - 1);
        2.0 * src[0] - src[k as usize]
    } else if j >= n {
        let k = (2 * (n - 1) - j).max(0);
        2.0 * src[(n - 1) as usize] - src[k as usize]
    } else {
        src[j as usize]
    }
}

/// Kaiser window at `r` in `[-1, 1]`, linearly interpolated from a table.
fn kaiser(r: f64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let i0_beta = bessel_i0(KAISER_BETA);
        (0..=WINDOW_TABLE_LEN + 1)
            .map(|i| {
                let r = (i as f64 / WINDOW_TABLE_LEN as f64).min(1.0);
                bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / i0_beta
            })
            .collect()
    });
    let pos = r.abs().min(1.0) * WINDOW_TABLE_LEN as f64;
    let i = pos as usize;
    let frac = pos - i as f64;
    table[i] + frac * (table[i + 1] - table[i])
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::white_noise;

    #[test]
    fn identity_when_length_unchanged() {
        let f = Frame::new((0..37).map(|i| (i as f64 * 0.37).sin()).collect());
        let g = resample_frame(&f, 37).unwrap();
        for (a, b) in f.as_slice().iter().zip(g.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn tabulated_window_matches_series() {
        let i0_beta = bessel_i0(KAISER_BETA);
        for k in 0..=1000 {
            let r = k as f64 / 1000.0 - 0.0004;
            let exact = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
            assert!((kaiser(r) - exact).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_degenerate_lengths() {
        assert!(resample_frame(&Frame::new(vec![1.0]), 10).is_err());
        assert!(resample_frame(&Frame::new(vec![1.0, 2.0]), 1).is_err());
    }

    #[test]
    fn upsampled_sine_matches_analytic() {
        // 4 full cycles across the index axis [0, 199]
        let f = Frame::new((0..200).map(|j| (2.0 * PI * 4.0 * j as f64 / 199.0).sin()).collect());
        let g = resample_frame(&f, 400).unwrap();
        let edge = 20;
        let max_dev = (edge..400 - edge)
            .map(|i| {
                let ideal = (2.0 * PI * 4.0 * i as f64 / 399.0).sin();
                (g.as_slice()[i] - ideal).abs()
            })
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-3, "max deviation {max_dev}");
    }

    #[test]
    fn lowpass_noise_survives_down_up_round_trip() {
        let m = 280;
        let noise = white_noise(m + 200, 11);
        // moving-average cascade keeps the content well below a quarter of the rate
        let mut x: Vec<f64> = noise.into_vec();
        for _ in 0..4 {
            x = x.windows(5).map(|w| w.iter().sum::<f64>() / 5.0).collect();
        }
        let frame = Frame::new(x[50..50 + m].to_vec());
        let down = resample_frame(&frame, m / 2).unwrap();
        let up = resample_frame(&down, m).unwrap();
        let err: f64 = frame
            .as_slice()
            .iter()
            .zip(up.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let rel = err / frame.norm();
        assert!(rel < 0.05, "relative error {rel}");
    }

    #[test]
    fn output_length_is_exact() {
        let f = Frame::new(vec![0.0, 1.0, 0.0, -1.0, 0.0]);
        for n in [2, 3, 9, 64, 201] {
            assert_eq!(resample_frame(&f, n).unwrap().len(), n);
        }
    }

    #[test]
    fn bessel_reference_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-13);
    }
}
