//! Generating clustered embeddings and writing them in the dataset CSV format.
//!
//! cargo run -p adathresh --example synthetic_datasets -- /tmp/lfw_like.csv

use adathresh::io::{load_dataset_file, save_dataset};
use adathresh::synth::mean_similarities;
use adathresh::{generate, summarize, Result, SamplesPerClass, SynthConfig};

fn main() -> Result<()> {
    for kappa in [0.5, 2.0, 20.0] {
        let data = generate(&SynthConfig::lfw_like(300, 64, kappa, 7))?;
        let (within, between) = mean_similarities(&data);
        println!("kappa {kappa:>4}: {} | within {within:.3} between {between:+.3}", summarize(&data)?);
    }

    let custom = SynthConfig {
        num_classes: 5,
        dim: 8,
        samples_per_class: SamplesPerClass::Empirical(vec![1, 3, 10]),
        concentration: 4.0,
        seed: 3,
    };
    let data = generate(&custom)?;
    println!("custom: {}", summarize(&data)?);

    if let Some(path) = std::env::args().nth(1) {
        save_dataset(&path, &data)?;
        let back = load_dataset_file(&path)?;
        println!("wrote {path}: dim {}, {} rows", back.dim, back.items.len());
    }
    Ok(())
}
