//! Unit-norm embeddings, identity labels and inner-product similarity.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Norms below this are treated as zero.
pub const MIN_NORM: f64 = 1e-12;

/// Maximum deviation of a stored embedding's L2 norm from 1.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// Vectors whose norm is already within this distance of 1 are kept verbatim by
/// [`Embedding::normalize`], which makes normalization exactly idempotent.
const RENORMALIZE_EPSILON: f64 = 1e-12;

/// An L2-normalized feature vector.
///
/// Cloning is cheap: the components live behind an `Arc`.
#[derive(Clone, PartialEq)]
pub struct Embedding {
    values: Arc<[f64]>,
}

impl Embedding {
    /// Scales `raw` to unit length.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        check_components(raw)?;
        let norm = l2_norm(raw);
        if norm < MIN_NORM {
            return Err(Error::ZeroVector);
        }
        if (norm - 1.0).abs() <= RENORMALIZE_EPSILON {
            return Ok(Self { values: raw.into() });
        }
        Ok(Self {
            values: raw.iter().map(|v| v / norm).collect(),
        })
    }

    /// Wraps components that are already unit-norm without touching their bits.
    ///
    /// Used when reloading persisted state, where renormalizing could perturb
    /// the last bits of a stored vector.
    pub fn from_unit(values: Vec<f64>) -> Result<Self> {
        check_components(&values)?;
        let norm = l2_norm(&values);
        if norm < MIN_NORM {
            return Err(Error::ZeroVector);
        }
        if (norm - 1.0).abs() > UNIT_NORM_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "vector norm {norm} is not within {UNIT_NORM_TOLERANCE} of 1"
            )));
        }
        Ok(Self {
            values: values.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }

    /// Inner product with `other`, clamped to `[-1, 1]`.
    pub fn similarity(&self, other: &Embedding) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.similarity_unchecked(other))
    }

    /// Same as [`similarity`](Self::similarity) for callers that already
    /// validated dimensions.
    #[inline]
    pub(crate) fn similarity_unchecked(&self, other: &Embedding) -> f64 {
        dot(&self.values, &other.values).clamp(-1.0, 1.0)
    }
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Embedding").field(&&*self.values).finish()
    }
}

/// Free-function form of [`Embedding::similarity`].
pub fn similarity(a: &Embedding, b: &Embedding) -> Result<f64> {
    a.similarity(b)
}

// Plain left-to-right accumulation. Multiplication commutes exactly in IEEE
// arithmetic, so dot(a, b) and dot(b, a) are bit-identical.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_components(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Opaque, case-sensitive identity token.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdentityLabel(Arc<str>);

impl IdentityLabel {
    pub fn new(value: impl AsRef<str>) -> Result<Self> {
        let value = value.as_ref();
        if value.is_empty() {
            return Err(Error::EmptyLabel);
        }
        Ok(Self(value.into()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for IdentityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for IdentityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl serde::Serialize for IdentityLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> serde::Deserialize<'de> for IdentityLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        IdentityLabel::new(s).map_err(serde::de::Error::custom)
    }
}

/// An embedding together with its identity and provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledEmbedding {
    pub embedding: Embedding,
    pub label: IdentityLabel,
    /// Where the vector came from, e.g. an image file name or a row id.
    pub source_id: String,
}

impl LabeledEmbedding {
    pub fn new(embedding: Embedding, label: IdentityLabel, source_id: impl Into<String>) -> Self {
        Self {
            embedding,
            label,
            source_id: source_id.into(),
        }
    }

    /// Convenience constructor that normalizes `raw` and validates `label`.
    pub fn from_raw(raw: &[f64], label: &str, source_id: impl Into<String>) -> Result<Self> {
        Ok(Self::new(
            Embedding::normalize(raw)?,
            IdentityLabel::new(label)?,
            source_id,
        ))
    }
}

/// Checks that every item shares one dimension and returns it.
pub fn common_dim(items: &[LabeledEmbedding]) -> Result<usize> {
    let first = items.first().ok_or(Error::EmptyDataset)?.embedding.dim();
    for item in items {
        if item.embedding.dim() != first {
            return Err(Error::DimensionMismatch {
                expected: first,
                found: item.embedding.dim(),
            });
        }
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn emb(v: &[f64]) -> Embedding {
        Embedding::normalize(v).unwrap()
    }

    #[test]
    fn normalize_three_four_five() {
        let e = emb(&[3.0, 4.0]);
        assert!((e.values()[0] - 0.6).abs() < 1e-15);
        assert!((e.values()[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn normalize_keeps_unit_vector() {
        assert_eq!(emb(&[1.0, 0.0, 0.0]).values(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_rejects_degenerate_input() {
        assert!(matches!(Embedding::normalize(&[0.0, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(Embedding::normalize(&[1e-13, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(Embedding::normalize(&[1.0, f64::NAN]), Err(Error::NonFinite(1))));
        assert!(matches!(
            Embedding::normalize(&[f64::INFINITY]),
            Err(Error::NonFinite(0))
        ));
        assert!(matches!(Embedding::normalize(&[]), Err(Error::EmptyVector)));
    }

    #[test]
    fn similarity_examples() {
        let x = emb(&[1.0, 0.0]);
        let y = emb(&[0.0, 1.0]);
        assert_eq!(similarity(&x, &y).unwrap(), 0.0);
        assert_eq!(similarity(&x, &x).unwrap(), 1.0);
        let a = emb(&[0.6, 0.8]);
        let b = emb(&[0.8, 0.6]);
        assert!((similarity(&a, &b).unwrap() - 0.96).abs() < 1e-12);
    }

    #[test]
    fn similarity_dimension_mismatch() {
        let x = emb(&[1.0, 0.0]);
        let y = emb(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            similarity(&x, &y),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn from_unit_rejects_unnormalized() {
        assert!(Embedding::from_unit(vec![3.0, 4.0]).is_err());
        let e = Embedding::from_unit(vec![0.6, 0.8]).unwrap();
        assert_eq!(e.values(), &[0.6, 0.8]);
    }

    #[test]
    fn labels_are_case_sensitive() {
        assert_ne!(IdentityLabel::new("alice").unwrap(), IdentityLabel::new("Alice").unwrap());
        assert!(matches!(IdentityLabel::new(""), Err(Error::EmptyLabel)));
    }

    #[test]
    fn common_dim_detects_mixed_files() {
        let a = LabeledEmbedding::from_raw(&[1.0, 0.0], "A", "0").unwrap();
        let b = LabeledEmbedding::from_raw(&[1.0, 0.0, 0.0], "B", "1").unwrap();
        assert_eq!(common_dim(&[a.clone()]).unwrap(), 2);
        assert!(common_dim(&[a, b]).is_err());
        assert!(matches!(common_dim(&[]), Err(Error::EmptyDataset)));
    }

    fn nonzero_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, dim)
            .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
    }

    proptest! {
        #[test]
        fn similarity_is_bounded_and_symmetric(a in nonzero_vec(8), b in nonzero_vec(8)) {
            let (a, b) = (emb(&a), emb(&b));
            let ab = a.similarity(&b).unwrap();
            prop_assert!((-1.0..=1.0).contains(&ab));
            prop_assert_eq!(ab.to_bits(), b.similarity(&a).unwrap().to_bits());
            prop_assert!((a.similarity(&a).unwrap() - 1.0).abs() <= 1e-6);
        }

        #[test]
        fn normalize_is_idempotent(v in nonzero_vec(6)) {
            let once = emb(&v);
            let twice = Embedding::normalize(once.values()).unwrap();
            prop_assert!((once.norm() - 1.0).abs() <= UNIT_NORM_TOLERANCE);
            for (x, y) in once.values().iter().zip(twice.values()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn similarity_ignores_positive_scale(
            v in nonzero_vec(5), w in nonzero_vec(5), s in 0.01f64..100.0, r in 0.01f64..100.0
        ) {
            let base = emb(&v).similarity(&emb(&w)).unwrap();
            let vs: Vec<f64> = v.iter().map(|x| x * s).collect();
            let wr: Vec<f64> = w.iter().map(|x| x * r).collect();
            let scaled = emb(&vs).similarity(&emb(&wr)).unwrap();
            prop_assert!((base - scaled).abs() <= 1e-6);
        }
    }
}
