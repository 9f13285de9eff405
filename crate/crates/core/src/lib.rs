//! Open-set face gallery with per-entry adaptive thresholds.
//!
//! Embeddings are enrolled one at a time. Each entry carries its own
//! acceptance threshold: the highest similarity it has with any entry of a
//! different identity. A query is matched to its most similar entry and
//! accepted only if the score reaches that entry's threshold; otherwise it is
//! treated as an intruder.
//!
//! Besides the gallery itself the crate provides:
//!
//! - [`calibration`]: the fixed-threshold baseline, chosen by k-fold
//!   cross-validation over sampled verification pairs.
//! - [`protocol`]: a timeline evaluation in which every probe is first
//!   recognized against the current gallery and then enrolled, with each step
//!   classified as true/false accept, true/false reject or identification error.
//! - [`synth`]: synthetic clustered embeddings shaped like common face datasets.
//! - [`io`]: dataset CSV, gallery snapshot and report formats.
//!
//! ```
//! use adathresh::{Embedding, Gallery, LabeledEmbedding, Decision};
//!
//! let mut gallery = Gallery::new(0.38)?;
//! gallery.register(LabeledEmbedding::from_raw(&[1.0, 0.0], "alice", "a.jpg")?)?;
//! gallery.register(LabeledEmbedding::from_raw(&[0.6, 0.8], "bob", "b.jpg")?)?;
//!
//! let hit = gallery.recognize(&Embedding::normalize(&[0.99, 0.05])?)?;
//! assert!(matches!(hit.decision, Decision::Identified(ref who) if who.as_str() == "alice"));
//! # Ok::<(), adathresh::Error>(())
//! ```

pub mod calibration;
pub mod cli;
pub mod embedding;
pub mod error;
pub mod gallery;
pub mod io;
pub mod policy;
pub mod protocol;
pub mod synth;

pub use calibration::{
    calibrate_fixed_threshold, calibrate_with, sample_pairs, CalibrationResult, CvSelection, VerificationPair,
};
pub use embedding::{similarity, Embedding, IdentityLabel, LabeledEmbedding};
pub use error::{Error, Result};
pub use gallery::{Decision, Gallery, GalleryEntry, RecognitionResult};
pub use policy::{evaluate_phi, ThresholdPolicy};
pub use protocol::{
    classify_outcome, run_comparison, run_experiment, run_protocol, Comparison, EvalReport, ExperimentReport,
    OutcomeCounts, OutcomeKind, ProbeOutcome,
};
pub use synth::{generate, summarize, SamplesPerClass, SynthConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate's one RNG construction, so every seeded step uses the same generator.
pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
