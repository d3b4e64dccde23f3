//! F0 tracking, the voiced pitch histogram and normalized-pitch selection,
//! and center-of-gravity glottal closure instant detection.

mod f0;
mod gci;
mod histogram;

pub use f0::{track_f0, F0Frame, F0Track, PitchConfig};
pub use gci::{compute_cog, detect_gci, Gci, GciConfig, GciList, GciPolarity};
pub use histogram::{build_histogram, mass_above, normalized_pitch, PitchHistogram};
