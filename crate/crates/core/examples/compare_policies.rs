//! Adaptive versus fixed thresholds on three synthetic dataset shapes, using
//! the same ten shuffles for both policies.
//!
//! cargo run -p adathresh --release --example compare_policies

use adathresh::{calibrate_fixed_threshold, generate, run_comparison, sample_pairs, summarize, Result, SynthConfig};

fn main() -> Result<()> {
    let presets = [
        ("LFW-like", SynthConfig::lfw_like(950, 128, 0.5, 1)),
        ("Adience-like", SynthConfig::adience_like(240, 128, 0.5, 1)),
        ("FERET-like", SynthConfig::feret_like(180, 128, 0.5, 1)),
    ];
    println!("{:<13} {:<40} {:>9} {:>16}", "dataset", "shape", "adaptive", "fixed/threshold");
    for (name, config) in presets {
        let data = generate(&config)?;
        let threshold = calibrate_fixed_threshold(&sample_pairs(&data, 6000, 1)?, 10, 1)?.threshold;
        let cmp = run_comparison(&data, threshold, 10, 1)?;
        println!(
            "{name:<13} {:<40} {:>8.2}% {:>8.2}%/{threshold:.4}",
            summarize(&data)?.to_string(),
            100.0 * cmp.adaptive.mean_acc,
            100.0 * cmp.fixed.mean_acc,
        );
        if name == "LFW-like" {
            for t in [10, 100, 500, 1000, data.len()] {
                println!(
                    "    t={t:<5} temporary accuracy adaptive {:.3} fixed {:.3}",
                    cmp.adaptive.mean_curve[t - 1],
                    cmp.fixed.mean_curve[t - 1]
                );
            }
        }
    }
    Ok(())
}
