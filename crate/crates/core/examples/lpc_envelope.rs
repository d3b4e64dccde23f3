//! Frame-wise LPC on an AR(2) process: inverse filtering gives the residual
//! and the synthesis filter puts the envelope back.

use eigenres::envelope::{analyze_envelope, inverse_filter, lpc_analyze, synth_filter, EnvelopeConfig};
use eigenres::signal::{white_noise, Signal};

fn main() -> eigenres::Result<()> {
    let sr = 16000;
    let e = white_noise(2 * sr, 7).into_vec();
    let mut x = vec![0.0; e.len()];
    for t in 0..e.len() {
        x[t] = e[t] + if t > 0 { 1.3 * x[t - 1] } else { 0.0 } - if t > 1 { 0.6 * x[t - 2] } else { 0.0 };
    }

    let whole = lpc_analyze(&x, 2)?;
    println!("AR(2) truth [1.3, -0.6], estimate {:?}", whole.predictor());

    let signal = Signal::new(x.clone(), sr as u32)?;
    let cfg = EnvelopeConfig::default();
    let track = analyze_envelope(&signal, &cfg)?;
    let residual = inverse_filter(&signal, &track, &cfg)?;
    let back = synth_filter(&residual, &track, &cfg)?;

    let warm = sr / 20;
    let num: f64 = back.samples()[warm..]
        .iter()
        .zip(&x[warm..])
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let den: f64 = x[warm..].iter().map(|v| v * v).sum();
    println!(
        "{} envelope records of order {}; residual/speech energy {:.3}; round trip rel. error {:.2e}",
        track.records.len(),
        track.order,
        residual.energy() / signal.energy(),
        (num / den).sqrt()
    );
    Ok(())
}
