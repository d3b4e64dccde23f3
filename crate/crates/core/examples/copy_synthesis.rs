//! Analysis followed by resynthesis with eigen and pulse excitation,
//! compared by log-spectral distortion over voiced frames.

use eigenres::cli::{copy_synthesis, RunConfig};
use eigenres::corpus::{generate_corpus, SpeakerProfile};
use eigenres::eigen::{train_model, TrainConfig};
use eigenres::signal::Signal;

fn main() -> eigenres::Result<()> {
    let corpus: Vec<Signal> = generate_corpus(&SpeakerProfile::female(), 5, 24, 3.0)
        .into_iter()
        .map(|u| u.signal)
        .collect();
    let (train, test) = corpus.split_at(20);
    let (model, report) = train_model(train, &TrainConfig::default())?;
    println!("{}", report.summary());

    let cfg = RunConfig::default();
    for (i, s) in test.iter().enumerate() {
        let (eigen, pulse, outputs) = copy_synthesis(s, &model, &cfg)?;
        println!("utt {i}: lsd eigen {eigen:.2} dB, pulse {pulse:.2} dB");
        if i == 0 {
            if let Some(dir) = std::env::args().nth(1) {
                eigenres::signal::write_wav(s, format!("{dir}/original.wav"))?;
                eigenres::signal::write_wav(&outputs[0], format!("{dir}/eigen.wav"))?;
                eigenres::signal::write_wav(&outputs[1], format!("{dir}/pulse.wav"))?;
            }
        }
    }
    Ok(())
}
