#![allow(dead_code)]

use adathresh::{Embedding, IdentityLabel, LabeledEmbedding};
use rand::Rng;

/// Random unit vector with Gaussian-ish components.
pub fn random_embedding(rng: &mut impl Rng, dim: usize) -> Embedding {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Ok(e) = Embedding::normalize(&v) {
            return e;
        }
    }
}

/// A sequence of `len` items over a skewed pool of identities; a few items
/// reuse an earlier vector verbatim so ties and exact duplicates occur.
pub fn random_sequence(rng: &mut impl Rng, len: usize, dim: usize) -> Vec<LabeledEmbedding> {
    let pool = rng.random_range(1..=len.max(1));
    let mut out: Vec<LabeledEmbedding> = Vec::with_capacity(len);
    for i in 0..len {
        // Squaring a uniform draw favors low identity numbers.
        let u: f64 = rng.random();
        let who = ((u * u) * pool as f64) as usize;
        let embedding = if i > 0 && rng.random_bool(0.05) {
            out[rng.random_range(0..i)].embedding.clone()
        } else {
            random_embedding(rng, dim)
        };
        out.push(LabeledEmbedding::new(
            embedding,
            IdentityLabel::new(format!("id{who}")).unwrap(),
            format!("row{i}"),
        ));
    }
    out
}
