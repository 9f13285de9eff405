//! Persisting a gallery between sessions and continuing to enroll into it.
//!
//! cargo run -p adathresh --example snapshot_persistence

use adathresh::io::{load_gallery, save_gallery};
use adathresh::{generate, Embedding, Gallery, Result, SynthConfig};

fn main() -> Result<()> {
    let data = generate(&SynthConfig::feret_like(12, 32, 2.0, 5))?;
    let (first, rest) = data.split_at(data.len() / 2);

    let mut gallery = Gallery::new(0.3968)?;
    for item in first {
        gallery.register(item.clone())?;
    }
    let dir = std::env::temp_dir().join("adathresh-example");
    std::fs::create_dir_all(&dir).map_err(|e| adathresh::Error::io(&dir, e))?;
    let path = dir.join("gallery.json");
    save_gallery(&path, &gallery)?;
    println!("saved {} entries to {}", gallery.len(), path.display());

    let mut restored = load_gallery(&path)?;
    assert_eq!(restored.thresholds(), gallery.thresholds());
    for item in rest {
        restored.register(item.clone())?;
    }
    println!(
        "restored and extended to {} entries of {} identities",
        restored.len(),
        restored.identity_count()
    );

    let probe = Embedding::normalize(rest[0].embedding.values())?;
    let r = restored.recognize(&probe)?;
    println!("probe of {}: {:?} (score {:.4})", rest[0].label, r.decision, r.score);
    Ok(())
}
