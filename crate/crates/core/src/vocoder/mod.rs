//! Copy-synthesis vocoder: analysis into parameter tracks, eigenresidual and
//! pulse-train excitation, envelope filtering, and the spectral distance used
//! to compare them.

mod excitation;
mod lsd;
mod track;

pub use excitation::{build_excitation_eigen, build_excitation_pulse, gci_times_from_f0};
pub use lsd::log_spectral_distortion;
pub use track::{ParameterTrack, UnvoicedSegment, VoicedRecord};

use crate::analysis::{front_end, AnalysisConfig};
use crate::eigen::{extract_frames, EigenModel};
use crate::envelope::synth_filter;
use crate::error::{Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnvoicedGainMode {
    /// Residual RMS measured at analysis.
    #[default]
    Analysis,
    /// Unit gain for every unvoiced hop.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExcitationKind {
    #[default]
    Eigen,
    Pulse,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SynthConfig {
    pub noise_seed: u64,
    pub unvoiced_gain_mode: UnvoicedGainMode,
    pub excitation_kind: ExcitationKind,
}

/// Synthesized speech; `normalized` is set when the output was rescaled to a
/// 0.9 peak to avoid clipping.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub signal: Signal,
    pub normalized: bool,
}

/// Analyzes one utterance into a parameter track at the model's order.
///
/// Each voiced record comes from one GCI whose two-period frame fits in the
/// signal; unvoiced segments are the samples the F0 tracker marked
/// unvoiced, with residual RMS per envelope hop.
pub fn analyze_utterance(signal: &Signal, model: &EigenModel, cfg: &AnalysisConfig) -> Result<ParameterTrack> {
    let sr = signal.sample_rate();
    if sr != model.sample_rate {
        return Err(Error::SampleRateMismatch {
            expected: model.sample_rate,
            actual: sr,
        });
    }
    let fe = front_end(signal, cfg)?;
    let extraction = extract_frames(&fe.residual, &fe.gcis, model.f0_star, 0)?;
    if extraction.m != model.m() {
        return Err(Error::InvalidArgument(format!(
            "model frame length {} does not match {} implied by its F0*",
            model.m(),
            extraction.m
        )));
    }
    let k = model.k_default();
    let voiced = extraction
        .frames
        .iter()
        .zip(&extraction.origins)
        .map(|(frame, origin)| {
            let gci = fe
                .gcis
                .gcis
                .binary_search_by_key(&origin.gci, |g| g.index)
                .map(|i| fe.gcis.gcis[i]);
            let period = gci.map(|g| g.period).unwrap_or(origin.period as f64);
            Ok(VoicedRecord {
                gci_time: origin.gci as f64 / sr as f64,
                f0: sr as f64 / period,
                gain: origin.gain,
                coefficients: model.project(frame.as_slice(), k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let hop = fe.envelope.hop;
    let residual = fe.residual.samples();
    let mask = fe.f0.voiced_mask(signal.len());
    let mut unvoiced = Vec::new();
    let mut t = 0;
    while t < mask.len() {
        if mask[t] {
            t += 1;
            continue;
        }
        let start = t;
        while t < mask.len() && !mask[t] {
            t += 1;
        }
        let gains = (start..t)
            .step_by(hop)
            .map(|a| {
                let chunk = &residual[a..(a + hop).min(t)];
                (chunk.iter().map(|v| v * v).sum::<f64>() / chunk.len() as f64).sqrt()
            })
            .collect();
        unvoiced.push(UnvoicedSegment { start, end: t, gains });
    }

    let track = ParameterTrack {
        sample_rate: sr,
        n_samples: signal.len(),
        k,
        envelope_config: cfg.envelope.clone(),
        envelope: fe.envelope,
        voiced,
        unvoiced,
    };
    track.validate()?;
    Ok(track)
}

/// Excitation per `cfg.excitation_kind`, then the track's synthesis filter.
pub fn synthesize(track: &ParameterTrack, model: Option<&EigenModel>, cfg: &SynthConfig) -> Result<Synthesis> {
    let excitation = match cfg.excitation_kind {
        ExcitationKind::Eigen => {
            let model = model.ok_or_else(|| Error::InvalidArgument("eigen excitation requires a model".into()))?;
            build_excitation_eigen(track, model, cfg)?
        }
        ExcitationKind::Pulse => build_excitation_pulse(track, cfg)?,
    };
    let speech = synth_filter(&excitation, &track.envelope, &track.envelope_config)?;
    let peak = speech.peak();
    Ok(if peak > 1.0 {
        log::warn!("output peak {peak:.3} would clip; normalizing to 0.9");
        Synthesis {
            signal: speech.scaled(0.9 / peak),
            normalized: true,
        }
    } else {
        Synthesis {
            signal: speech,
            normalized: false,
        }
    })
}
