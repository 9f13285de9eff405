//! Choosing the fixed-threshold baseline: sample balanced verification pairs
//! and average the per-fold accuracy-optimal thresholds of 10-fold CV.
//!
//! cargo run -p adathresh --release --example calibrate_fixed_threshold

use adathresh::{calibrate_fixed_threshold, generate, sample_pairs, Result, SynthConfig};

fn main() -> Result<()> {
    let data = generate(&SynthConfig::lfw_like(950, 128, 0.5, 1))?;
    let pairs = sample_pairs(&data, 6000, 1)?;
    let positives = pairs.iter().filter(|p| p.same_identity).count();
    println!("{} pairs ({positives} same-identity)", pairs.len());

    let result = calibrate_fixed_threshold(&pairs, 10, 1)?;
    for (k, (t, acc)) in result.per_fold_thresholds.iter().zip(&result.per_fold_accuracy).enumerate() {
        println!("fold {k}: threshold {t:.4}, held-out accuracy {acc:.4}");
    }
    println!("fixed threshold = {:.4}", result.threshold);
    Ok(())
}
