//! The threshold function consulted when a probe's best match is entry `u`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gallery::{check_threshold, Gallery};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ThresholdPolicy {
    /// Use the matched entry's own adaptive threshold.
    Adaptive,
    /// Use one constant for every entry.
    Fixed(f64),
}

impl ThresholdPolicy {
    pub fn fixed(value: f64) -> Result<Self> {
        Ok(ThresholdPolicy::Fixed(check_threshold(value)?))
    }

    /// Threshold applied when the best match is entry `reg_index`.
    pub fn evaluate(&self, gallery: &Gallery, reg_index: usize) -> Result<f64> {
        match *self {
            ThresholdPolicy::Fixed(c) => Ok(c),
            ThresholdPolicy::Adaptive => gallery
                .entry(reg_index)
                .map(|e| e.threshold)
                .ok_or(Error::UnknownIndex(reg_index)),
        }
    }

    /// Threshold reported when there is no entry to match.
    pub(crate) fn empty_gallery_phi(&self, gallery: &Gallery) -> f64 {
        match *self {
            ThresholdPolicy::Fixed(c) => c,
            ThresholdPolicy::Adaptive => gallery.initial_threshold(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ThresholdPolicy::Adaptive => "adaptive",
            ThresholdPolicy::Fixed(_) => "fixed",
        }
    }
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdPolicy::Adaptive => f.write_str("adaptive"),
            ThresholdPolicy::Fixed(c) => write!(f, "fixed:{c}"),
        }
    }
}

impl FromStr for ThresholdPolicy {
    type Err = Error;

    /// Parses `adaptive` or `fixed:<value>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "adaptive" => Ok(ThresholdPolicy::Adaptive),
            Some(("fixed", v)) => {
                let value: f64 = v
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad fixed threshold {v:?}")))?;
                ThresholdPolicy::fixed(value)
            }
            _ => Err(Error::InvalidConfig(format!(
                "unknown policy {s:?}; expected adaptive or fixed:<value>"
            ))),
        }
    }
}

/// Free-function form of [`ThresholdPolicy::evaluate`].
pub fn evaluate_phi(policy: &ThresholdPolicy, gallery: &Gallery, reg_index: usize) -> Result<f64> {
    policy.evaluate(gallery, reg_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::LabeledEmbedding;

    fn gallery() -> Gallery {
        let mut g = Gallery::new(0.3779).unwrap();
        g.register(LabeledEmbedding::from_raw(&[1.0, 0.0], "A", "").unwrap()).unwrap();
        g.register(LabeledEmbedding::from_raw(&[0.6, 0.8], "B", "").unwrap()).unwrap();
        g.register(LabeledEmbedding::from_raw(&[0.6, 0.8], "B", "").unwrap()).unwrap();
        g
    }

    #[test]
    fn fixed_ignores_index_and_gallery() {
        let g = gallery();
        let p = ThresholdPolicy::fixed(0.3779).unwrap();
        for u in [1, 2, 3, 99] {
            assert_eq!(evaluate_phi(&p, &g, u).unwrap(), 0.3779);
        }
        assert_eq!(evaluate_phi(&p, &Gallery::new(0.0).unwrap(), 1).unwrap(), 0.3779);
    }

    #[test]
    fn adaptive_reads_entry_threshold() {
        let g = gallery();
        assert_eq!(evaluate_phi(&ThresholdPolicy::Adaptive, &g, 1).unwrap(), 0.6);
    }

    #[test]
    fn adaptive_unknown_index() {
        let g = gallery();
        assert!(matches!(
            evaluate_phi(&ThresholdPolicy::Adaptive, &g, 5),
            Err(Error::UnknownIndex(5))
        ));
        assert!(matches!(
            evaluate_phi(&ThresholdPolicy::Adaptive, &g, 0),
            Err(Error::UnknownIndex(0))
        ));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("adaptive".parse::<ThresholdPolicy>().unwrap(), ThresholdPolicy::Adaptive);
        assert_eq!(
            "fixed:0.25".parse::<ThresholdPolicy>().unwrap(),
            ThresholdPolicy::Fixed(0.25)
        );
        assert!("fixed:2".parse::<ThresholdPolicy>().is_err());
        assert!("fixed:x".parse::<ThresholdPolicy>().is_err());
        assert!("both".parse::<ThresholdPolicy>().is_err());
        assert_eq!(ThresholdPolicy::Fixed(0.5).to_string(), "fixed:0.5");
    }
}
