//! Two-period Hann frames placed one period apart sum to a constant, which is
//! what lets pitch-synchronous frames be cut and pasted back without ripple.

use eigenres::signal::{overlap_add, resample_frame, two_period_window};

fn main() -> eigenres::Result<()> {
    for period in [80, 123, 160] {
        let w = two_period_window(period)?;
        let centers: Vec<usize> = (0..20).map(|i| i * period).collect();
        let y = overlap_add(&vec![w.clone(); centers.len()], &centers, 20 * period);
        let interior = &y[period..19 * period];
        let dev = interior.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        println!(
            "period {period:>3}: frame {} samples, max deviation from 1 = {dev:.2e}",
            w.len()
        );
    }

    // stretching a window to another length keeps its shape
    let w = two_period_window(100)?;
    let r = resample_frame(&w, 160)?;
    println!(
        "resampled 200 -> {} samples, peak {:.4} at {}",
        r.len(),
        r.as_slice()[80],
        80
    );
    Ok(())
}
