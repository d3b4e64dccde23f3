//! Synthetic speech for tests, examples and desk-scale experiments.
//!
//! Voiced sound is an LF-model glottal flow derivative train (with jitter,
//! shimmer, voice-quality drift and pitch-synchronous aspiration noise)
//! passed through a cascade of time-varying formant resonators. Unvoiced
//! stretches are resonant noise bursts or silence. Every utterance carries its
//! ground truth: closure instants and a per-sample voicing mask.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::signal::{white_noise, Signal};

/// Parameters of one LF glottal-derivative cycle, in samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfPulse {
    pub period: f64,
    /// Instant of maximum flow.
    pub tp: f64,
    /// Instant of the negative peak (glottal closure).
    pub te: f64,
    /// Return-phase time constant.
    pub ta: f64,
    /// Magnitude of the negative peak.
    pub ee: f64,
    alpha: f64,
    epsilon: f64,
    e0: f64,
}

impl LfPulse {
    /// Builds a cycle from the `Rd` voice-quality parameter
    /// (about 0.3 pressed, 1.0 modal, 2.7 breathy).
    pub fn from_rd(period: f64, rd: f64, ee: f64) -> Self {
        let rap = (-1.0 + 4.8 * rd) / 100.0;
        let rkp = (22.4 + 11.8 * rd) / 100.0;
        let rgp = 0.25 * rkp / (0.11 * rd / (0.5 + 1.2 * rkp) - rap);
        let tp = period / (2.0 * rgp);
        let te = tp * (1.0 + rkp);
        let ta = rap * period;
        Self::from_timing(period, tp, te, ta, ee)
    }

    pub fn from_timing(period: f64, tp: f64, te: f64, ta: f64, ee: f64) -> Self {
        assert!(0.0 < tp && tp < te && te < period && ta > 0.0, "invalid LF timing");
        let tb = period - te;
        // epsilon * ta = 1 - exp(-epsilon * tb)
        let mut epsilon = 1.0 / ta;
        for _ in 0..50 {
            let f = epsilon * ta - 1.0 + (-epsilon * tb).exp();
            let df = ta - tb * (-epsilon * tb).exp();
            let next = epsilon - f / df;
            if (next - epsilon).abs() < 1e-14 * epsilon {
                epsilon = next;
                break;
            }
            epsilon = next;
        }
        let wg = PI / tp;
        let return_area =
            -(ee / (epsilon * ta)) * ((1.0 - (-epsilon * tb).exp()) / epsilon - tb * (-epsilon * tb).exp());
        let open_area = |alpha: f64| {
            let e0 = -ee / ((alpha * te).exp() * (wg * te).sin());
            e0 * ((alpha * te).exp() * (alpha * (wg * te).sin() - wg * (wg * te).cos()) + wg)
                / (alpha * alpha + wg * wg)
        };
        // zero net flow: open_area(alpha) + return_area = 0
        let g = |a: f64| open_area(a) + return_area;
        let (mut lo, mut hi) = (-20.0 / period, 20.0 / period);
        while g(lo) * g(hi) > 0.0 {
            lo *= 2.0;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let alpha = 0.5 * (lo + hi);
        let e0 = -ee / ((alpha * te).exp() * (wg * te).sin());
        LfPulse {
            period,
            tp,
            te,
            ta,
            ee,
            alpha,
            epsilon,
            e0,
        }
    }

    /// Glottal flow derivative at time `t` (samples) from the cycle start.
    pub fn value(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.period {
            0.0
        } else if t <= self.te {
            self.e0 * (self.alpha * t).exp() * (PI * t / self.tp).sin()
        } else {
            let tb = self.period - self.te;
            -(self.ee / (self.epsilon * self.ta)) * ((-self.epsilon * (t - self.te)).exp() - (-self.epsilon * tb).exp())
        }
    }
}

/// A periodic LF derivative train; returns the samples and the closure
/// instants (rounded negative-peak positions).
pub fn lf_pulse_train(len: usize, period: f64, rd: f64, first_onset: f64) -> (Vec<f64>, Vec<usize>) {
    let pulse = LfPulse::from_rd(period, rd, 1.0);
    let mut x = vec![0.0; len];
    let mut gcis = Vec::new();
    let mut onset = first_onset;
    while onset < len as f64 {
        let start = onset.ceil().max(0.0) as usize;
        let end = ((onset + period).ceil() as usize).min(len);
        for (t, v) in x.iter_mut().enumerate().take(end).skip(start) {
            *v += pulse.value(t as f64 - onset);
        }
        let gci = (onset + pulse.te).round();
        if gci >= 0.0 && (gci as usize) < len {
            gcis.push(gci as usize);
        }
        onset += period;
    }
    (x, gcis)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerProfile {
    pub sample_rate: u32,
    pub f0_mean: f64,
    /// Pitch excursion around the mean, in semitones.
    pub f0_range_st: f64,
    pub rd_mean: f64,
    pub rd_spread: f64,
    /// Relative cycle-to-cycle period perturbation.
    pub jitter: f64,
    /// Relative cycle-to-cycle amplitude perturbation.
    pub shimmer: f64,
    /// Aspiration noise level relative to the closure peak.
    pub aspiration: f64,
    /// Scales all formant frequencies (vocal tract length).
    pub formant_scale: f64,
}

impl SpeakerProfile {
    pub fn male() -> Self {
        SpeakerProfile {
            sample_rate: 16000,
            f0_mean: 115.0,
            f0_range_st: 4.0,
            rd_mean: 1.1,
            rd_spread: 0.25,
            jitter: 0.005,
            shimmer: 0.04,
            aspiration: 0.02,
            formant_scale: 1.0,
        }
    }

    pub fn female() -> Self {
        SpeakerProfile {
            f0_mean: 200.0,
            rd_mean: 1.4,
            formant_scale: 1.15,
            ..Self::male()
        }
    }
}

/// Generated audio plus its ground truth.
#[derive(Debug, Clone)]
pub struct Utterance {
    pub signal: Signal,
    pub gcis: Vec<usize>,
    pub voiced: Vec<bool>,
}

const VOWELS: [[f64; 5]; 6] = [
    [730.0, 1090.0, 2440.0, 3400.0, 4200.0],
    [270.0, 2290.0, 3010.0, 3500.0, 4300.0],
    [300.0, 870.0, 2240.0, 3400.0, 4200.0],
    [530.0, 1840.0, 2480.0, 3500.0, 4300.0],
    [570.0, 840.0, 2410.0, 3400.0, 4200.0],
    [490.0, 1350.0, 1690.0, 3300.0, 4200.0],
];
const BANDWIDTHS: [f64; 5] = [70.0, 100.0, 140.0, 200.0, 260.0];

#[derive(Debug, Clone, Copy)]
enum Segment {
    Voiced { len: usize, from: usize, to: usize },
    Fricative { len: usize, center: f64 },
    Silence { len: usize },
}

/// Generates one utterance of roughly `duration` seconds.
pub fn generate_utterance(profile: &SpeakerProfile, seed: u64, duration: f64) -> Utterance {
    let sr = profile.sample_rate as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ms = |v: f64| (v * 1e-3 * sr).round() as usize;

    let mut segments = vec![Segment::Silence { len: ms(100.0) }];
    let mut total = ms(100.0);
    let target = (duration * sr) as usize;
    let mut vowel = rng.random_range(0..VOWELS.len());
    while total + ms(250.0) < target {
        let next = rng.random_range(0..VOWELS.len());
        let len = ms(rng.random_range(150.0..380.0));
        segments.push(Segment::Voiced {
            len,
            from: vowel,
            to: next,
        });
        vowel = next;
        total += len;
        let gap = match rng.random_range(0..3) {
            0 => Segment::Fricative {
                len: ms(rng.random_range(70.0..150.0)),
                center: rng.random_range(2500.0..5500.0),
            },
            _ => Segment::Silence {
                len: ms(rng.random_range(40.0..110.0)),
            },
        };
        total += match gap {
            Segment::Fricative { len, .. } | Segment::Silence { len } | Segment::Voiced { len, .. } => len,
        };
        segments.push(gap);
    }
    segments.push(Segment::Silence { len: ms(100.0) });
    let n: usize = segments
        .iter()
        .map(|s| match *s {
            Segment::Voiced { len, .. } | Segment::Fricative { len, .. } | Segment::Silence { len } => len,
        })
        .sum();

    let mut source = vec![0.0; n];
    let mut fric = vec![0.0; n];
    let mut formants = vec![[0.0; 5]; n];
    let mut voiced = vec![false; n];
    let mut gcis = Vec::new();
    let aspiration = white_noise(n, seed ^ 0x5eed_0001);
    let fric_noise = white_noise(n, seed ^ 0x5eed_0002);

    let mut pos = 0usize;
    let mut last_vowel = VOWELS[vowel];
    let declination = rng.random_range(0.5..1.5);
    for seg in &segments {
        match *seg {
            Segment::Voiced { len, from, to } => {
                let accent = rng.random_range(-1.0..1.0) * profile.f0_range_st;
                let slope = rng.random_range(-1.0..1.0) * profile.f0_range_st * 0.5;
                let rd_base = profile.rd_mean + rng.random_range(-1.0..1.0) * profile.rd_spread;
                let ramp = ms(15.0) as f64;
                let mut onset = pos as f64 + rng.random_range(0.0..5.0);
                let end = (pos + len) as f64;
                while onset < end {
                    let u = (onset - pos as f64) / len as f64;
                    let utt = onset / n as f64;
                    let st = accent * (PI * u).sin() + slope * (u - 0.5) - declination * 2.0 * utt;
                    let f0 = profile.f0_mean * 2f64.powf(st / 12.0);
                    let period = sr / f0 * (1.0 + profile.jitter * gaussian(&mut rng));
                    if onset + period > end {
                        break;
                    }
                    let rd = (rd_base + 0.05 * gaussian(&mut rng)).clamp(0.4, 2.5);
                    let edge = ((onset - pos as f64).min(end - onset - period) / ramp).clamp(0.0, 1.0);
                    let amp = (1.0 + profile.shimmer * gaussian(&mut rng)) * (0.5 - 0.5 * (PI * edge).cos());
                    let pulse = LfPulse::from_rd(period, rd, amp);
                    let start = onset.ceil() as usize;
                    let stop = ((onset + period).ceil() as usize).min(n);
                    for t in start..stop {
                        let tau = t as f64 - onset;
                        let mut v = pulse.value(tau);
                        // aspiration noise concentrated around closure
                        let d = (tau - pulse.te) / (0.25 * period);
                        v += profile.aspiration * amp * aspiration.as_slice()[t] * (-d * d).exp();
                        source[t] += v;
                    }
                    if amp > 0.3 {
                        gcis.push((onset + pulse.te).round() as usize);
                    }
                    onset += period;
                }
                let (a, b) = (scaled(&VOWELS[from], profile), scaled(&VOWELS[to], profile));
                for t in 0..len {
                    let u = smoothstep(t as f64 / len as f64);
                    for k in 0..5 {
                        formants[pos + t][k] = a[k] + (b[k] - a[k]) * u;
                    }
                    voiced[pos + t] = true;
                }
                last_vowel = b;
                pos += len;
            }
            Segment::Fricative { len, center } => {
                let mut res = Resonator::default();
                let ramp = ms(20.0) as f64;
                for t in 0..len {
                    let edge = (t as f64).min((len - t) as f64) / ramp;
                    let g = 0.15 * (0.5 - 0.5 * (PI * edge.min(1.0)).cos());
                    fric[pos + t] = res.tick(g * fric_noise.as_slice()[pos + t], center, 0.4 * center, sr);
                    formants[pos + t] = last_vowel;
                }
                pos += len;
            }
            Segment::Silence { len } => {
                for t in 0..len {
                    formants[pos + t] = last_vowel;
                }
                pos += len;
            }
        }
    }

    let mut tract = [Resonator::default(); 5];
    let mut out: Vec<f64> = (0..n)
        .map(|t| {
            let mut v = source[t];
            for (k, r) in tract.iter_mut().enumerate() {
                v = r.tick(v, formants[t][k], BANDWIDTHS[k] * profile.formant_scale, sr);
            }
            v + fric[t]
        })
        .collect();
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    gcis.retain(|&g| g < n && voiced[g]);
    Utterance {
        signal: Signal::new(out, profile.sample_rate).expect("finite synthetic speech"),
        gcis,
        voiced,
    }
}

/// Generates `count` utterances with consecutive seeds.
pub fn generate_corpus(profile: &SpeakerProfile, seed: u64, count: usize, duration: f64) -> Vec<Utterance> {
    (0..count)
        .map(|i| generate_utterance(profile, seed.wrapping_add(i as u64 * 7919), duration))
        .collect()
}

fn scaled(f: &[f64; 5], profile: &SpeakerProfile) -> [f64; 5] {
    let mut out = *f;
    for v in &mut out {
        *v = (*v * profile.formant_scale).min(0.45 * profile.sample_rate as f64);
    }
    out
}

fn smoothstep(u: f64) -> f64 {
    u * u * (3.0 - 2.0 * u)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Two-pole resonator with unity gain at DC.
#[derive(Debug, Clone, Copy, Default)]
struct Resonator {
    y1: f64,
    y2: f64,
}

impl Resonator {
    fn tick(&mut self, x: f64, freq: f64, bw: f64, sr: f64) -> f64 {
        let r = (-PI * bw / sr).exp();
        let c1 = 2.0 * r * (2.0 * PI * freq / sr).cos();
        let c2 = -r * r;
        let y = (1.0 - c1 - c2) * x + c1 * self.y1 + c2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}
