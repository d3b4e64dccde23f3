//! Pitch modification: keep an utterance's envelope and gains, replace its
//! F0 with a raised contour and excite with the mean eigenresidual.

use eigenres::analysis::AnalysisConfig;
use eigenres::corpus::{generate_corpus, SpeakerProfile};
use eigenres::eigen::{train_model, TrainConfig};
use eigenres::pitch::{track_f0, F0Track};
use eigenres::signal::Signal;
use eigenres::vocoder::{analyze_utterance, gci_times_from_f0, synthesize, SynthConfig, VoicedRecord};

fn main() -> eigenres::Result<()> {
    let signals: Vec<Signal> = generate_corpus(&SpeakerProfile::male(), 2, 20, 3.0)
        .into_iter()
        .map(|u| u.signal)
        .collect();
    let (model, _) = train_model(&signals, &TrainConfig::default())?;
    let cfg = AnalysisConfig::default();
    let speech = &signals[0];
    let mut track = analyze_utterance(speech, &model, &cfg)?;

    let f0 = track_f0(speech, &cfg.pitch)?;
    let raised: Vec<f64> = f0.frames.iter().map(|f| f.f0 * 1.3).collect();
    let target = F0Track::from_values(f0.sample_rate, f0.hop, &raised);
    let sr = speech.sample_rate() as f64;
    let mean_gain = track.voiced.iter().map(|r| r.gain).sum::<f64>() / track.voiced.len().max(1) as f64;
    let times = gci_times_from_f0(&target, speech.len());
    track.voiced = times
        .iter()
        .map(|&t| {
            let f = target.frame_at((t * sr) as usize).map_or(0.0, |f| f.f0);
            VoicedRecord {
                gci_time: t,
                f0: if f > 0.0 { f } else { mean_f0(&target) },
                gain: mean_gain,
                coefficients: vec![0.0; track.k],
            }
        })
        .collect();

    let out = synthesize(&track, Some(&model), &SynthConfig::default())?;
    let check = track_f0(&out.signal, &cfg.pitch)?;
    println!(
        "mean F0 original {:.1} Hz, requested {:.1} Hz, resynthesized {:.1} Hz",
        mean_f0(&f0),
        mean_f0(&target),
        mean_f0(&check)
    );
    if let Some(path) = std::env::args().nth(1) {
        eigenres::signal::write_wav(&out.signal, &path)?;
    }
    Ok(())
}

fn mean_f0(t: &F0Track) -> f64 {
    let v: Vec<f64> = t.frames.iter().filter(|f| f.voiced).map(|f| f.f0).collect();
    v.iter().sum::<f64>() / v.len().max(1) as f64
}
