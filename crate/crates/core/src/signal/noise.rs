use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Frame;

/// Zero-mean, unit-variance Gaussian noise.
///
/// Samples come from Box-Muller pairs over a ChaCha8 stream seeded with
/// `seed`, so the output is a pure function of `(n, seed)` on every platform.
pub fn white_noise(n: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        // u1 in (0, 1] keeps the logarithm finite
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * PI * u2;
        out.push(radius * angle.cos());
        if out.len() < n {
            out.push(radius * angle.sin());
        }
    }
    Frame::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty() {
        assert!(white_noise(0, 5).is_empty());
    }

    #[test]
    fn moments() {
        for seed in [0, 1, 42, 0xdead_beef] {
            let x = white_noise(100_000, seed);
            let n = x.len() as f64;
            let mean = x.as_slice().iter().sum::<f64>() / n;
            let var = x.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!(mean.abs() < 0.02, "seed {seed}: mean {mean}");
            assert!((0.97..=1.03).contains(&var), "seed {seed}: var {var}");
        }
    }

    #[test]
    fn deterministic() {
        let a = white_noise(1001, 7);
        let b = white_noise(1001, 7);
        assert!(a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = white_noise(1001, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn prefix_stable() {
        // a shorter request is a prefix of a longer one with the same seed
        let a = white_noise(10, 3);
        let b = white_noise(11, 3);
        assert_eq!(a.as_slice(), &b.as_slice()[..10]);
    }
}
