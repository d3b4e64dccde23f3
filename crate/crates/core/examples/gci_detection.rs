//! GCI detection on a synthetic LF-excited vowel, scored against the known
//! closure instants.

use eigenres::analysis::{front_end, AnalysisConfig};
use eigenres::corpus::{generate_utterance, SpeakerProfile};

fn main() -> eigenres::Result<()> {
    let utt = generate_utterance(&SpeakerProfile::male(), 3, 3.0);
    let fe = front_end(&utt.signal, &AnalysisConfig::default())?;
    let tol = 4; // 0.25 ms at 16 kHz
    let hits = fe
        .gcis
        .gcis
        .iter()
        .filter(|g| utt.gcis.iter().any(|&t| t.abs_diff(g.index) <= tol))
        .count();
    println!(
        "true GCIs {}, detected {}, within 0.25 ms {} ({:.1}%)",
        utt.gcis.len(),
        fe.gcis.len(),
        hits,
        100.0 * hits as f64 / fe.gcis.len().max(1) as f64
    );
    for g in fe.gcis.gcis.iter().take(5) {
        println!("  t={:.4}s period={:.1}", g.index as f64 / 16000.0, g.period);
    }
    Ok(())
}
