use nalgebra::DMatrix;

use super::{select_k, EigenModel, ResidualFrameSet};
use crate::error::{Error, Result};

const DEFAULT_THRESHOLD: f64 = 0.75;

/// PCA of the frame set.
///
/// Eigenvalues are the squared singular values of the mean-centered data over
/// `N - 1`, sorted non-increasing; `r = min(N - 1, m)` components are kept.
/// Each eigenresidual is sign-fixed so its largest-magnitude sample is
/// positive. With `N > m` the `m x m` scatter matrix is diagonalized
/// directly. Otherwise the transposed data is QR-factored first and the small
/// `N x N` matrix `R R^T` is diagonalized, its eigenvectors mapped back
/// through `Q`. The retained order defaults to the smallest `k` with
/// `I(k) >= 0.75`.
pub fn compute_pca(set: &ResidualFrameSet) -> Result<EigenModel> {
    let n = set.len();
    let m = set.m();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("PCA needs at least 2 frames, got {n}")));
    }
    if set.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite frame data".into()));
    }

    let mut mean = vec![0.0; m];
    for row in set.rows() {
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= n as f64);

    let centered = DMatrix::from_fn(n, m, |i, j| set.data()[i * m + j] - mean[j]);
    // squared singular values and the matching m-dimensional vectors as columns
    let (squared, vectors) = if n > m {
        let eig = (centered.transpose() * &centered).symmetric_eigen();
        (eig.eigenvalues, eig.eigenvectors)
    } else {
        let qr = centered.transpose().qr();
        let (q, r) = (qr.q(), qr.r());
        let eig = (&r * r.transpose()).symmetric_eigen();
        (eig.eigenvalues, q * eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..squared.len()).collect();
    order.sort_by(|&a, &b| squared[b].total_cmp(&squared[a]).then(a.cmp(&b)));
    let r = (n - 1).min(m);

    let mut eigenvalues = Vec::with_capacity(r);
    let mut basis = Vec::with_capacity(r * m);
    for &i in order.iter().take(r) {
        eigenvalues.push((squared[i] / (n - 1) as f64).max(0.0));
        let mut row: Vec<f64> = vectors.column(i).iter().cloned().collect();
        let pivot = row
            .iter()
            .enumerate()
            .fold(
                (0, 0.0f64),
                |best, (j, v)| if v.abs() > best.1 { (j, v.abs()) } else { best },
            )
            .0;
        if row[pivot] < 0.0 {
            row.iter_mut().for_each(|v| *v = -*v);
        }
        basis.extend(row);
    }
    let k = select_k(&eigenvalues, DEFAULT_THRESHOLD)?;
    EigenModel::from_parts(set.sample_rate, set.f0_star, mean, eigenvalues, basis, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::FrameOrigin;
    use crate::signal::{white_noise, Frame};

    const ORIGIN: FrameOrigin = FrameOrigin {
        utterance: 0,
        gci: 0,
        period: 1,
        gain: 1.0,
    };

    fn unit(v: Vec<f64>) -> Frame {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        Frame::new(v.into_iter().map(|x| x / n).collect())
    }

    fn random_set(n: usize, m: usize, seed: u64) -> ResidualFrameSet {
        let noise = white_noise(n * m, seed);
        let mut set = ResidualFrameSet::new(16000, 100.0, m).unwrap();
        for row in noise.as_slice().chunks(m) {
            set.push(&unit(row.to_vec()), ORIGIN).unwrap();
        }
        set
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        (num / b.iter().map(|y| y * y).sum::<f64>()).sqrt()
    }

    #[test]
    fn identical_frames_have_zero_dispersion() {
        let f = unit((0..8).map(|i| (i as f64).sin() + 0.1).collect());
        let mut set = ResidualFrameSet::new(16000, 100.0, 8).unwrap();
        for _ in 0..5 {
            set.push(&f, ORIGIN).unwrap();
        }
        let model = compute_pca(&set).unwrap();
        for (a, b) in model.mean().iter().zip(f.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(model.r(), 4);
        assert!(model.eigenvalues().iter().all(|&l| l.abs() < 1e-12));
        assert!(model.orthonormality_error() < 1e-8);
    }

    #[test]
    fn one_factor_data() {
        // rows = base +- t v: mean = base, mu_1 = +-v, lambda_1 = var(t)
        let m = 16;
        let v = unit((0..m).map(|i| ((i * 7 % 5) as f64) - 2.0).collect());
        let base: Vec<f64> = (0..m).map(|i| if i == 3 { 2.0 } else { 0.0 }).collect();
        let ts = [-0.3, -0.1, 0.0, 0.2, 0.2];
        let t_mean = ts.iter().sum::<f64>() / ts.len() as f64;
        let var = ts.iter().map(|t| (t - t_mean).powi(2)).sum::<f64>() / (ts.len() - 1) as f64;
        let mut data = Vec::new();
        for t in ts {
            data.extend(base.iter().zip(v.as_slice()).map(|(b, x)| b + t * x));
        }
        // unit-norm rows are a frame-set invariant; build the matrix directly
        let set = ResidualFrameSet {
            sample_rate: 16000,
            f0_star: 100.0,
            m,
            data,
            origins: vec![ORIGIN; ts.len()],
        };
        let model = compute_pca(&set).unwrap();
        let mu = model.eigenresidual(0);
        let align = mu.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum::<f64>();
        assert!((align.abs() - 1.0).abs() < 1e-8);
        assert!((model.eigenvalues()[0] - var).abs() < 1e-12);
        assert!(model.eigenvalues()[1..].iter().all(|&l| l < 1e-12));
    }

    #[test]
    fn completeness_on_random_data() {
        let set = random_set(50, 280, 3);
        let model = compute_pca(&set).unwrap();
        assert_eq!(model.r(), 49);
        assert!(model.orthonormality_error() < 1e-8);
        for row in set.rows() {
            let c = model.project(row, model.r()).unwrap();
            let back = model.reconstruct_raw(&c).unwrap();
            assert!(rel_err(&back, row) < 1e-6);
            let normed = model.reconstruct(&c).unwrap();
            assert!(rel_err(normed.as_slice(), row) < 1e-6);
        }
    }

    #[test]
    fn tall_data_dispersion() {
        let set = random_set(400, 24, 4);
        let model = compute_pca(&set).unwrap();
        assert_eq!(model.r(), 24);
        assert!(model.orthonormality_error() < 1e-8);
        assert!(model.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        // dispersion identity: variance of projections equals lambda_i
        for i in 0..model.r() {
            let c: Vec<f64> = set.rows().map(|r| model.project(r, i + 1).unwrap()[i]).collect();
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            let var = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (c.len() - 1) as f64;
            assert!((var - model.eigenvalues()[i]).abs() <= 1e-6 * model.eigenvalues()[i]);
        }
    }

    #[test]
    fn sign_convention_and_determinism() {
        let set = random_set(30, 20, 5);
        let a = compute_pca(&set).unwrap();
        let b = compute_pca(&set).unwrap();
        assert_eq!(a, b);
        for i in 0..a.r() {
            let mu = a.eigenresidual(i);
            let max = mu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let first = mu.iter().find(|v| v.abs() == max).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn rank_deficient_wide_case_is_exact() {
        // 5 unit rows of length 14; a plain SVD of this matrix recomposes
        // with ~2e-3 error in nalgebra
        let rows: [[f64; 14]; 5] = [
            [
                0.0,
                0.0,
                -0.4765083031628638,
                0.0,
                0.19514468020462877,
                0.4503852302529334,
                0.0,
                0.06395774285908093,
                0.17543973582038025,
                -0.15903934471765085,
                -0.5242395960951706,
                -0.39655354696032646,
                -0.1994152915633025,
                0.0,
            ],
            [
                0.3384340982458596,
                0.0,
                0.0,
                -0.41773414083822696,
                -0.18941520072066373,
                0.35521349300612676,
                0.0,
                0.3882427319179036,
                0.040269043753992366,
                -0.3400743034733882,
                0.3064187333695769,
                0.23552805738701382,
                -0.2676267211836307,
                -0.2447678294268501,
            ],
            [
                0.24287702027409733,
                0.04879753831041429,
                -0.22367048100380024,
                0.3363327650645379,
                0.4066995747016244,
                -0.03824399743611752,
                -0.3326009263802139,
                -0.2021999539131454,
                0.4723029885338759,
                -0.1098563136346718,
                0.39607622996062986,
                -0.12219430806595888,
                0.19430141388928224,
                -0.1113849380706909,
            ],
            [
                0.09397556301105378,
                0.14305349261411018,
                0.2028812137342694,
                0.3630985707105843,
                0.3639827107772006,
                -0.05477790623951627,
                -0.03847276030240026,
                0.2364826206974345,
                0.3410552816167577,
                -0.2678600878331417,
                0.3402234299696179,
                0.29623294452584,
                0.33413859056502776,
                0.31873570200903945,
            ],
            [
                0.5024025370257457,
                0.14367944899362606,
                -0.08635288007796262,
                0.15777141140203343,
                -0.34194942663968575,
                -0.2086932767996926,
                0.28749233144579234,
                -0.29051311045117933,
                -0.25810419169509013,
                0.19761661886996398,
                -0.02606916725386044,
                0.46645091940144756,
                -0.20656663523986196,
                0.02171009254743771,
            ],
        ];
        let mut set = ResidualFrameSet::new(16000, 100.0, 14).unwrap();
        for (i, r) in rows.iter().enumerate() {
            let origin = FrameOrigin {
                utterance: 0,
                gci: i,
                period: 7,
                gain: 1.0,
            };
            set.push(&Frame::new(r.to_vec()), origin).unwrap();
        }
        let model = compute_pca(&set).unwrap();
        assert_eq!(model.r(), 4);
        assert!(model.orthonormality_error() < 1e-12);
        for r in &rows {
            let c = model.project(r, 4).unwrap();
            assert!(rel_err(&model.reconstruct_raw(&c).unwrap(), r) < 1e-12);
        }
    }

    #[test]
    fn needs_two_frames() {
        let set = random_set(1, 8, 6);
        assert!(compute_pca(&set).is_err());
    }
}
