//! The timeline protocol on a handful of probes: each one is recognized
//! against the current gallery, classified, then enrolled.
//!
//! cargo run -p adathresh --example timeline_protocol

use adathresh::{run_protocol, LabeledEmbedding, Result, ThresholdPolicy};

fn main() -> Result<()> {
    let rows = [
        ([1.0, 0.0, 0.1], "ann"),
        ([0.0, 1.0, 0.2], "ben"),
        ([0.95, 0.1, 0.1], "ann"),
        ([0.5, 0.5, 0.7], "cid"),
        ([0.1, 0.9, 0.3], "ben"),
        ([0.55, 0.45, 0.6], "dee"),
        ([0.9, 0.05, 0.3], "ann"),
    ];
    let data = rows
        .iter()
        .enumerate()
        .map(|(i, (v, who))| LabeledEmbedding::from_raw(v, who, format!("probe{i}")))
        .collect::<Result<Vec<_>>>()?;

    for policy in [ThresholdPolicy::Adaptive, ThresholdPolicy::Fixed(0.5)] {
        let report = run_protocol(&data, policy, 0.5)?;
        println!("policy {policy}");
        println!("  step  truth  best   score    phi      outcome               running acc");
        for (o, acc) in report.outcomes.iter().zip(&report.temporary_accuracy) {
            println!(
                "  {:>4}  {:<5}  {:<5}  {:+.4}  {:+.4}  {:<20}  {:.3}",
                o.step,
                o.true_label,
                o.best_label.as_ref().map_or("-", |l| l.as_str()),
                o.score,
                o.phi,
                format!("{:?}", o.kind),
                acc
            );
        }
        println!("  ACC = {:.4}  counts {:?}\n", report.final_acc, report.counts);
    }
    Ok(())
}
