use rayon::prelude::*;

use super::{compute_pca, extract_frames, frame_length, EigenModel, ResidualFrameSet};
use crate::analysis::{front_end, AnalysisConfig, FrontEnd};
use crate::error::{Error, Result};
use crate::pitch::{normalized_pitch, PitchHistogram};
use crate::signal::Signal;

/// How the model's default order is chosen after PCA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KSelection {
    /// Smallest `k` with `I(k) >= threshold`.
    Threshold(f64),
    /// Fixed order, capped at `r`.
    Fixed(usize),
    /// All `r` components.
    Full,
}

impl Default for KSelection {
    fn default() -> Self {
        KSelection::Threshold(0.75)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub analysis: AnalysisConfig,
    pub histogram_bin_hz: f64,
    /// Fraction of voiced frames whose F0 lies above the normalized pitch.
    pub upper_mass: f64,
    pub k: KSelection,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            analysis: AnalysisConfig::default(),
            histogram_bin_hz: 2.0,
            upper_mass: 0.8,
            k: KSelection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub utterances: usize,
    pub voiced_frames: usize,
    pub histogram: PitchHistogram,
    pub f0_star: f64,
    pub m: usize,
    /// Rows that entered the PCA.
    pub n: usize,
    pub skipped: usize,
    pub k: usize,
    /// `I(k)` for `k = 0..=r`.
    pub information_rate: Vec<f64>,
}

impl TrainReport {
    pub fn summary(&self) -> String {
        format!(
            "N={} m={} r={} f0_star={:.3} k={} I(k)={:.6}",
            self.n,
            self.m,
            self.information_rate.len() - 1,
            self.f0_star,
            self.k,
            self.information_rate[self.k]
        )
    }
}

/// Front end over every utterance, pooled pitch histogram, frame extraction
/// at the normalized pitch, then PCA.
///
/// Utterances are analyzed in parallel; results are merged in input order.
pub fn train_model(utterances: &[Signal], cfg: &TrainConfig) -> Result<(EigenModel, TrainReport)> {
    let Some(first) = utterances.first() else {
        return Err(Error::NoUsableFrames);
    };
    let sr = first.sample_rate();
    if let Some(bad) = utterances.iter().find(|u| u.sample_rate() != sr) {
        return Err(Error::SampleRateMismatch {
            expected: sr,
            actual: bad.sample_rate(),
        });
    }
    cfg.analysis.validate(sr)?;

    let fronts: Vec<FrontEnd> = utterances
        .par_iter()
        .map(|u| front_end(u, &cfg.analysis))
        .collect::<Result<_>>()?;

    let voiced: Vec<f64> = fronts
        .iter()
        .flat_map(|f| f.f0.frames.iter().filter(|fr| fr.voiced).map(|fr| fr.f0))
        .collect();
    let histogram = match PitchHistogram::from_values(&voiced, cfg.histogram_bin_hz) {
        Ok(h) => h,
        Err(Error::NoVoicedFrames) => return Err(Error::NoUsableFrames),
        Err(e) => return Err(e),
    };
    let f0_star = normalized_pitch(&histogram, cfg.upper_mass)?;
    let m = frame_length(sr, f0_star);

    let extractions = fronts
        .par_iter()
        .enumerate()
        .map(|(i, f)| extract_frames(&f.residual, &f.gcis, f0_star, i as u32))
        .collect::<Result<Vec<_>>>()?;
    let mut set = ResidualFrameSet::new(sr, f0_star, m)?;
    let mut skipped = 0;
    for ex in &extractions {
        set.extend(ex)?;
        skipped += ex.skipped;
    }
    if set.len() < 2 {
        return Err(Error::NoUsableFrames);
    }
    log::info!(
        "training on {} frames of {m} samples (F0* = {f0_star:.2} Hz)",
        set.len()
    );

    let mut model = compute_pca(&set)?;
    let k = match cfg.k {
        KSelection::Threshold(t) => model.select_k(t)?,
        KSelection::Fixed(k) => k.min(model.r()),
        KSelection::Full => model.r(),
    };
    model.set_k_default(k)?;
    let information_rate = (0..=model.r())
        .map(|k| model.information_rate(k))
        .collect::<Result<Vec<_>>>()?;
    let report = TrainReport {
        utterances: utterances.len(),
        voiced_frames: voiced.len(),
        histogram,
        f0_star,
        m,
        n: set.len(),
        skipped,
        k,
        information_rate,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, SpeakerProfile};

    #[test]
    fn empty_corpus_has_no_usable_frames() {
        let err = train_model(&[], &TrainConfig::default()).unwrap_err();
        assert_eq!(err.to_string(), "no usable frames");
        let silent = Signal::zeros(16000, 16000).unwrap();
        let err = train_model(&[silent], &TrainConfig::default()).unwrap_err();
        assert_eq!(err.to_string(), "no usable frames");
    }

    #[test]
    fn mixed_rates_rejected() {
        let a = Signal::zeros(100, 16000).unwrap();
        let b = Signal::zeros(100, 8000).unwrap();
        assert!(matches!(
            train_model(&[a, b], &TrainConfig::default()),
            Err(Error::SampleRateMismatch { .. })
        ));
    }

    #[test]
    fn small_corpus_trains_a_valid_model() {
        let corpus = generate_corpus(&SpeakerProfile::male(), 11, 3, 2.0);
        let signals: Vec<Signal> = corpus.into_iter().map(|u| u.signal).collect();
        let (model, report) = train_model(&signals, &TrainConfig::default()).unwrap();
        assert_eq!(report.m, frame_length(16000, report.f0_star));
        assert_eq!(model.m(), report.m);
        assert!(model.orthonormality_error() < 1e-8);
        assert!((report.information_rate[model.r()] - 1.0).abs() < 1e-9);
        assert!(report.information_rate[report.k] >= 0.75);
        assert!(report.f0_star > 80.0 && report.f0_star < 130.0);
    }

    #[test]
    fn k_selection_variants() {
        let corpus = generate_corpus(&SpeakerProfile::male(), 12, 2, 1.5);
        let signals: Vec<Signal> = corpus.into_iter().map(|u| u.signal).collect();
        let full = TrainConfig {
            k: KSelection::Full,
            ..Default::default()
        };
        let (model, _) = train_model(&signals, &full).unwrap();
        assert_eq!(model.k_default(), model.r());
        let fixed = TrainConfig {
            k: KSelection::Fixed(5),
            ..Default::default()
        };
        let (model, _) = train_model(&signals, &fixed).unwrap();
        assert_eq!(model.k_default(), 5);
    }
}
