//! Trains a model on two minutes of synthetic speech and prints the
//! information-rate curve. Pass a path to also save the model.

use eigenres::corpus::{generate_corpus, SpeakerProfile};
use eigenres::eigen::{save_model, train_model, TrainConfig};
use eigenres::signal::Signal;

fn main() -> eigenres::Result<()> {
    let signals: Vec<Signal> = generate_corpus(&SpeakerProfile::male(), 1, 40, 3.0)
        .into_iter()
        .map(|u| u.signal)
        .collect();
    let (model, report) = train_model(&signals, &TrainConfig::default())?;
    println!("{}", report.summary());
    for k in [1, 2, 5, 10, 20, 40, 80] {
        if k <= model.r() {
            println!("I({k:>2}) = {:.3}", model.information_rate(k)?);
        }
    }
    if let Some(path) = std::env::args().nth(1) {
        save_model(&model, &path)?;
        println!("saved {path}");
    }
    Ok(())
}
