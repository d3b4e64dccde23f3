use super::Frame;

/// Index of the sample a frame is anchored on: `len / 2`.
pub fn frame_center(len: usize) -> usize {
    len / 2
}

/// Overlap-adds frames anchored at `centers` into a buffer of `total_len`.
///
/// Frame sample `j` lands at `center - len/2 + j`. Portions that fall outside
/// `[0, total_len)` are dropped.
pub fn overlap_add(frames: &[Frame], centers: &[usize], total_len: usize) -> Vec<f64> {
    debug_assert_eq!(frames.len(), centers.len());
    debug_assert!(centers.windows(2).all(|w| w[0] <= w[1]));
    let mut out = vec![0.0; total_len];
    for (frame, &center) in frames.iter().zip(centers) {
        add_frame(&mut out, frame.as_slice(), center as isize);
    }
    out
}

pub(crate) fn add_frame(out: &mut [f64], frame: &[f64], center: isize) {
    let start = center - frame_center(frame.len()) as isize;
    let total = out.len() as isize;
    for (j, &v) in frame.iter().enumerate() {
        let t = start + j as isize;
        if (0..total).contains(&t) {
            out[t as usize] += v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::two_period_window;
    use proptest::prelude::*;

    #[test]
    fn places_single_frame() {
        let out = overlap_add(&[Frame::new(vec![1.0, 2.0, 3.0])], &[5], 10);
        assert_eq!(out, vec![0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn clips_at_boundaries() {
        let f = Frame::new(vec![1.0, 1.0, 1.0, 1.0]);
        let out = overlap_add(&[f.clone(), f], &[0, 9], 10);
        assert_eq!(out, vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn half_overlap_sums() {
        let f = Frame::new(vec![1.0, 2.0, 3.0, 4.0]);
        let out = overlap_add(&[f.clone(), f], &[4, 6], 10);
        // first frame spans 2..6, second 4..8
        assert_eq!(out, vec![0.0, 0.0, 1.0, 2.0, 4.0, 6.0, 3.0, 4.0, 0.0, 0.0]);
    }

    #[test]
    fn hann_cola_at_half_window_hop() {
        // oracle: direct summation of shifted two-period windows over a constant source
        for period in [50usize, 80, 133, 160] {
            let w = two_period_window(period).unwrap();
            let total = 40 * period;
            let centers: Vec<usize> = (0..=40).map(|i| i * period).collect();
            let out = overlap_add(&vec![w; centers.len()], &centers, total);
            for &v in &out[2 * period..total - 2 * period] {
                assert!((v - 1.0).abs() < 1e-10, "period {period}: {v}");
            }
        }
    }

    proptest! {
        #[test]
        fn linear(a in -3.0f64..3.0, b in -3.0f64..3.0,
                  f in prop::collection::vec(-1.0f64..1.0, 1..20),
                  g in prop::collection::vec(-1.0f64..1.0, 1..20),
                  cf in 0usize..40, cg in 0usize..40) {
            let total = 40;
            let (mut frames, mut centers) = (vec![], vec![]);
            let fa = Frame::new(f.iter().map(|v| a * v).collect());
            let gb = Frame::new(g.iter().map(|v| b * v).collect());
            if cf <= cg {
                frames.extend([fa, gb]); centers.extend([cf, cg]);
            } else {
                frames.extend([gb, fa]); centers.extend([cg, cf]);
            }
            let joint = overlap_add(&frames, &centers, total);
            let of = overlap_add(&[Frame::new(f)], &[cf], total);
            let og = overlap_add(&[Frame::new(g)], &[cg], total);
            for t in 0..total {
                prop_assert!((joint[t] - (a * of[t] + b * og[t])).abs() < 1e-12);
            }
        }
    }
}
