use eigenres::corpus::{generate_corpus, SpeakerProfile};
use eigenres::pitch::{build_histogram, mass_above, normalized_pitch, track_f0, PitchConfig};

fn main() -> eigenres::Result<()> {
    for (name, profile) in [("male", SpeakerProfile::male()), ("female", SpeakerProfile::female())] {
        let corpus = generate_corpus(&profile, 9, 6, 3.0);
        let mut pooled = None;
        for u in &corpus {
            let h = build_histogram(&track_f0(&u.signal, &PitchConfig::default())?, 2.0)?;
            pooled = Some(match pooled {
                None => h,
                Some(p) => h.merge(&p)?,
            });
        }
        let hist = pooled.expect("non-empty corpus");
        let f0_star = normalized_pitch(&hist, 0.8)?;
        println!(
            "{name}: {} voiced frames, F0* = {f0_star:.2} Hz, mass above = {:.3}, frame length m = {}",
            hist.total(),
            mass_above(&hist, f0_star),
            eigenres::eigen::frame_length(16000, f0_star)
        );
    }
    Ok(())
}
