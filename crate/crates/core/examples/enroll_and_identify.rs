//! Enrolling faces one at a time and watching per-entry thresholds adapt,
//! then recognizing known people and rejecting an intruder.
//!
//! cargo run -p adathresh --example enroll_and_identify

use adathresh::{Decision, Embedding, Gallery, LabeledEmbedding, Result};

fn show(gallery: &Gallery) {
    for e in gallery.entries() {
        println!("  #{} {:<6} threshold {:+.4}", e.reg_index, e.label, e.threshold);
    }
}

fn main() -> Result<()> {
    let mut gallery = Gallery::new(0.3779)?;

    let enrollments = [
        ([1.0, 0.05, 0.0], "alice", "alice_1.jpg"),
        ([0.95, 0.2, 0.05], "alice", "alice_2.jpg"),
        ([0.3, 0.9, 0.1], "bob", "bob_1.jpg"),
        ([0.1, 0.2, 1.0], "carol", "carol_1.jpg"),
        ([0.25, 0.95, 0.2], "bob", "bob_2.jpg"),
    ];
    for (raw, who, file) in enrollments {
        gallery.register(LabeledEmbedding::from_raw(&raw, who, file)?)?;
        println!("after enrolling {file}:");
        show(&gallery);
    }

    let queries = [
        ("alice, new photo", [0.98, 0.1, 0.02]),
        ("bob, new photo", [0.28, 0.93, 0.12]),
        ("stranger", [-1.0, 0.2, 0.3]),
    ];
    for (name, raw) in queries {
        let r = gallery.recognize(&Embedding::normalize(&raw)?)?;
        let verdict = match &r.decision {
            Decision::Identified(label) => format!("identified as {label}"),
            Decision::Intruder => "rejected as intruder".to_string(),
        };
        println!(
            "{name:<18} best #{} score {:.4} vs threshold {:.4}: {verdict}",
            r.best_index.unwrap_or(0),
            r.score,
            r.threshold_used
        );
    }
    Ok(())
}
