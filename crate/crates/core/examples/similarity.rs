//! Normalizing raw feature vectors and scoring them by inner product.
//!
//! cargo run -p adathresh --example similarity

use adathresh::{similarity, Embedding, Result};

fn main() -> Result<()> {
    let a = Embedding::normalize(&[3.0, 4.0])?;
    let b = Embedding::normalize(&[0.8, 0.6])?;
    let c = Embedding::normalize(&[-4.0, 3.0])?;

    println!("a = {:?}", a.values());
    println!("a.b = {:.4}", similarity(&a, &b)?);
    println!("a.c = {:.4}  (orthogonal)", similarity(&a, &c)?);

    // Scale does not matter once vectors are normalized.
    let a10 = Embedding::normalize(&[30.0, 40.0])?;
    println!("a == normalize(10a): {}", a == a10);

    match Embedding::normalize(&[0.0, 0.0]) {
        Err(e) => println!("zero vector rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
