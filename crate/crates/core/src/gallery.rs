//! The enrolled gallery: one-at-a-time registration with per-entry adaptive
//! thresholds, and open-set recognition against it.
//!
//! Each entry's threshold is the highest similarity between that entry and any
//! entry of a *different* identity. Registration keeps every threshold current
//! with a single pass over the gallery: a new foreign entry can only raise an
//! existing maximum, so `σ_t = max(σ_{t-1}, S(τ, t))`. An entry whose identity is
//! the only one enrolled has no foreign set and keeps the gallery's initial
//! threshold until the first foreign entry arrives, at which point the initial
//! value is replaced (not floored) by the measured similarity.
//!
//! A `Gallery` is single-writer: `register` takes `&mut self`, so the borrow
//! checker already rules out recognition racing a registration.

use std::collections::HashMap;

use crate::embedding::{Embedding, IdentityLabel, LabeledEmbedding};
use crate::error::{Error, Result};
use crate::policy::ThresholdPolicy;

/// Score reported when recognizing against an empty gallery.
pub const EMPTY_GALLERY_SCORE: f64 = -1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct GalleryEntry {
    pub embedding: Embedding,
    pub label: IdentityLabel,
    pub source_id: String,
    /// Current adaptive threshold, always within `[-1, 1]`.
    pub threshold: f64,
    /// 1-based registration position.
    pub reg_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decision {
    Identified(IdentityLabel),
    Intruder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionResult {
    pub decision: Decision,
    /// Registration index of the best match; `None` for an empty gallery.
    pub best_index: Option<usize>,
    pub score: f64,
    pub threshold_used: f64,
}

impl RecognitionResult {
    pub fn is_accepted(&self) -> bool {
        matches!(self.decision, Decision::Identified(_))
    }
}

#[derive(Clone, Debug)]
pub struct Gallery {
    entries: Vec<GalleryEntry>,
    initial_threshold: f64,
    dim: Option<usize>,
    label_counts: HashMap<IdentityLabel, usize>,
}

pub(crate) fn check_threshold(value: f64) -> Result<f64> {
    if value.is_finite() && (-1.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::ThresholdOutOfRange(value))
    }
}

impl Gallery {
    pub fn new(initial_threshold: f64) -> Result<Self> {
        Ok(Self {
            entries: Vec::new(),
            initial_threshold: check_threshold(initial_threshold)?,
            dim: None,
            label_counts: HashMap::new(),
        })
    }

    /// Rebuilds a gallery from persisted entries, keeping their thresholds as stored.
    pub(crate) fn from_parts(
        initial_threshold: f64,
        dim: Option<usize>,
        entries: Vec<GalleryEntry>,
    ) -> Result<Self> {
        let mut gallery = Self::new(initial_threshold)?;
        gallery.dim = dim;
        for (pos, entry) in entries.into_iter().enumerate() {
            if entry.reg_index != pos + 1 {
                return Err(Error::InvalidSnapshot(format!(
                    "registration indices must be contiguous from 1; found {} at position {}",
                    entry.reg_index,
                    pos + 1
                )));
            }
            gallery.check_dim(&entry.embedding)?;
            check_threshold(entry.threshold)?;
            gallery.dim = Some(entry.embedding.dim());
            *gallery.label_counts.entry(entry.label.clone()).or_default() += 1;
            gallery.entries.push(entry);
        }
        Ok(gallery)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Embedding dimension, fixed by the first registration.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn initial_threshold(&self) -> f64 {
        self.initial_threshold
    }

    pub fn entries(&self) -> &[GalleryEntry] {
        &self.entries
    }

    pub fn entry(&self, reg_index: usize) -> Option<&GalleryEntry> {
        reg_index.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.threshold).collect()
    }

    pub fn contains_label(&self, label: &IdentityLabel) -> bool {
        self.label_counts.contains_key(label)
    }

    pub fn identity_count(&self) -> usize {
        self.label_counts.len()
    }

    fn check_dim(&self, embedding: &Embedding) -> Result<()> {
        match self.dim {
            Some(d) if d != embedding.dim() => Err(Error::DimensionMismatch {
                expected: d,
                found: embedding.dim(),
            }),
            _ => Ok(()),
        }
    }

    /// Similarity of `query` against every entry, in registration order.
    pub fn scores(&self, query: &Embedding) -> Result<Vec<f64>> {
        self.check_dim(query)?;
        Ok(self
            .entries
            .iter()
            .map(|e| e.embedding.similarity_unchecked(query))
            .collect())
    }

    /// Enrolls `item` and returns its registration index.
    pub fn register(&mut self, item: LabeledEmbedding) -> Result<usize> {
        let scores = self.scores(&item.embedding)?;
        Ok(self.register_scored(item, &scores))
    }

    /// Registration given precomputed `scores` (one per entry, from [`scores`](Self::scores)).
    pub(crate) fn register_scored(&mut self, item: LabeledEmbedding, scores: &[f64]) -> usize {
        debug_assert_eq!(scores.len(), self.entries.len());
        // With two or more identities enrolled, every entry already has a foreign peer.
        let had_foreign = self.label_counts.len() >= 2;
        let mut own: Option<f64> = None;
        for (entry, &s) in self.entries.iter_mut().zip(scores) {
            if entry.label == item.label {
                continue;
            }
            own = Some(own.map_or(s, |m| m.max(s)));
            entry.threshold = if had_foreign { entry.threshold.max(s) } else { s };
        }

        let reg_index = self.entries.len() + 1;
        self.dim = Some(item.embedding.dim());
        *self.label_counts.entry(item.label.clone()).or_default() += 1;
        self.entries.push(GalleryEntry {
            embedding: item.embedding,
            label: item.label,
            source_id: item.source_id,
            threshold: own.unwrap_or(self.initial_threshold),
            reg_index,
        });
        reg_index
    }

    /// Recognizes `query` using each entry's adaptive threshold.
    pub fn recognize(&self, query: &Embedding) -> Result<RecognitionResult> {
        self.recognize_with(query, &ThresholdPolicy::Adaptive)
    }

    /// Recognizes `query`, taking the acceptance threshold from `policy`.
    pub fn recognize_with(&self, query: &Embedding, policy: &ThresholdPolicy) -> Result<RecognitionResult> {
        let scores = self.scores(query)?;
        self.decide(&scores, policy)
    }

    pub(crate) fn decide(&self, scores: &[f64], policy: &ThresholdPolicy) -> Result<RecognitionResult> {
        let Some((best, score)) = best_match(scores) else {
            return Ok(RecognitionResult {
                decision: Decision::Intruder,
                best_index: None,
                score: EMPTY_GALLERY_SCORE,
                threshold_used: policy.empty_gallery_phi(self),
            });
        };
        let reg_index = best + 1;
        let threshold = policy.evaluate(self, reg_index)?;
        let decision = if score >= threshold {
            Decision::Identified(self.entries[best].label.clone())
        } else {
            Decision::Intruder
        };
        Ok(RecognitionResult {
            decision,
            best_index: Some(reg_index),
            score,
            threshold_used: threshold,
        })
    }

    /// Recomputes every threshold from scratch as the maximum similarity to
    /// any different-identity entry. Quadratic; meant for verification.
    pub fn brute_force_thresholds(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| {
                self.entries
                    .iter()
                    .filter(|v| v.label != e.label)
                    .map(|v| e.embedding.similarity_unchecked(&v.embedding))
                    .reduce(f64::max)
                    .unwrap_or(self.initial_threshold)
            })
            .collect()
    }
}

/// Position and value of the highest score; the earliest position wins ties.
pub(crate) fn best_match(scores: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best
}
