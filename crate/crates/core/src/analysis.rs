//! Shared front end: envelope, residual, F0 and GCIs for one utterance.

use crate::envelope::{analyze_envelope, inverse_filter, EnvelopeConfig, EnvelopeTrack};
use crate::error::Result;
use crate::pitch::{detect_gci, track_f0, F0Track, GciConfig, GciList, PitchConfig};
use crate::signal::Signal;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalysisConfig {
    pub envelope: EnvelopeConfig,
    pub pitch: PitchConfig,
    pub gci: GciConfig,
}

impl AnalysisConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        self.envelope.validate(sample_rate)?;
        self.pitch.validate(sample_rate)
    }
}

#[derive(Debug, Clone)]
pub struct FrontEnd {
    pub envelope: EnvelopeTrack,
    pub residual: Signal,
    pub f0: F0Track,
    pub gcis: GciList,
}

/// F0 is tracked on the speech signal; GCIs are picked on the residual.
pub fn front_end(signal: &Signal, cfg: &AnalysisConfig) -> Result<FrontEnd> {
    cfg.validate(signal.sample_rate())?;
    let envelope = analyze_envelope(signal, &cfg.envelope)?;
    let residual = inverse_filter(signal, &envelope, &cfg.envelope)?;
    let f0 = track_f0(signal, &cfg.pitch)?;
    let gcis = detect_gci(&residual, &f0, &cfg.gci);
    Ok(FrontEnd {
        envelope,
        residual,
        f0,
        gcis,
    })
}
