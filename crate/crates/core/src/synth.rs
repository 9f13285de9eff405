//! Synthetic labeled embeddings: Gaussian clusters on the unit sphere with
//! per-class sample counts shaped like common face datasets.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{Embedding, IdentityLabel, LabeledEmbedding};
use crate::error::{Error, Result};

/// Mean images per identity in the LFW-, Adience- and FERET-shaped presets.
pub const LFW_MEAN_PER_CLASS: f64 = 2.3;
pub const ADIENCE_MEAN_PER_CLASS: f64 = 8.46;
pub const FERET_MEAN_PER_CLASS: f64 = 11.35;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SamplesPerClass {
    Fixed(usize),
    /// `1 + Geometric(1/μ)`: mass concentrated at 1 with a long tail, mean μ.
    GeometricMean(f64),
    /// Each class draws its count uniformly from this list.
    Empirical(Vec<usize>),
}

impl SamplesPerClass {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            SamplesPerClass::Fixed(n) => *n >= 1,
            SamplesPerClass::GeometricMean(mu) => mu.is_finite() && *mu >= 1.0,
            SamplesPerClass::Empirical(list) => !list.is_empty() && list.iter().all(|&n| n >= 1),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid samples-per-class {self:?}")))
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        match self {
            SamplesPerClass::Fixed(n) => *n,
            SamplesPerClass::GeometricMean(mu) => {
                let failures = Geometric::new(1.0 / mu).expect("validated mean").sample(rng);
                1 + failures as usize
            }
            SamplesPerClass::Empirical(list) => list[rng.random_range(0..list.len())],
        }
    }
}

impl std::str::FromStr for SamplesPerClass {
    type Err = Error;

    /// `fixed:N`, `geometric:MEAN` or `empirical:N1;N2;...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse samples-per-class {s:?}"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let spec = match kind {
            "fixed" => SamplesPerClass::Fixed(value.parse().map_err(|_| bad())?),
            "geometric" => SamplesPerClass::GeometricMean(value.parse().map_err(|_| bad())?),
            "empirical" => SamplesPerClass::Empirical(
                value
                    .split(';')
                    .map(|v| v.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_classes: usize,
    pub dim: usize,
    pub samples_per_class: SamplesPerClass,
    /// Within-class tightness κ; noise per component has std `1/sqrt(κ·dim)`.
    pub concentration: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn lfw_like(num_classes: usize, dim: usize, concentration: f64, seed: u64) -> Self {
        Self::geometric(num_classes, dim, LFW_MEAN_PER_CLASS, concentration, seed)
    }

    pub fn adience_like(num_classes: usize, dim: usize, concentration: f64, seed: u64) -> Self {
        Self::geometric(num_classes, dim, ADIENCE_MEAN_PER_CLASS, concentration, seed)
    }

    pub fn feret_like(num_classes: usize, dim: usize, concentration: f64, seed: u64) -> Self {
        Self::geometric(num_classes, dim, FERET_MEAN_PER_CLASS, concentration, seed)
    }

    fn geometric(num_classes: usize, dim: usize, mean: f64, concentration: f64, seed: u64) -> Self {
        Self {
            num_classes,
            dim,
            samples_per_class: SamplesPerClass::GeometricMean(mean),
            concentration,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes == 0 {
            return Err(Error::InvalidConfig("num_classes must be at least 1".into()));
        }
        if self.dim < 2 {
            return Err(Error::InvalidConfig("dim must be at least 2".into()));
        }
        if !(self.concentration.is_finite() && self.concentration > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "concentration must be positive, got {}",
                self.concentration
            )));
        }
        self.samples_per_class.validate()
    }
}

pub fn class_label(class: usize) -> String {
    format!("class_{:04}", class + 1)
}

/// Generates a class-major dataset; deterministic in `config.seed`.
///
/// Every class draws from its own ChaCha stream, so classes are generated
/// independently (and in parallel) while staying reproducible.
pub fn generate(config: &SynthConfig) -> Result<Vec<LabeledEmbedding>> {
    config.validate()?;
    let sigma = 1.0 / (config.concentration * config.dim as f64).sqrt();
    let classes: Vec<Vec<LabeledEmbedding>> = (0..config.num_classes)
        .into_par_iter()
        .map(|class| {
            let mut rng = crate::seeded_rng(config.seed);
            rng.set_stream(class as u64);
            let center = random_unit(&mut rng, config.dim);
            let count = config.samples_per_class.draw(&mut rng);
            let label = IdentityLabel::new(class_label(class))?;
            (0..count)
                .map(|k| {
                    let raw: Vec<f64> = center
                        .iter()
                        .map(|c| {
                            let z: f64 = rng.sample(StandardNormal);
                            c + sigma * z
                        })
                        .collect();
                    Ok(LabeledEmbedding::new(
                        Embedding::normalize(&raw)?,
                        label.clone(),
                        format!("{label}_{:03}", k + 1),
                    ))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(classes.into_iter().flatten().collect())
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Image and identity counts of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub images: usize,
    pub classes: usize,
    pub mean_per_class: f64,
    /// Population standard deviation.
    pub std_per_class: f64,
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} images, {} classes, {:.2}±{:.2} images/class",
            self.images, self.classes, self.mean_per_class, self.std_per_class
        )
    }
}

pub fn summarize(dataset: &[LabeledEmbedding]) -> Result<DatasetStats> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    // Counts kept in first-appearance order so the float sums below are reproducible.
    let mut slot: HashMap<&IdentityLabel, usize> = HashMap::new();
    let mut counts: Vec<usize> = Vec::new();
    for item in dataset {
        let i = *slot.entry(&item.label).or_insert_with(|| {
            counts.push(0);
            counts.len() - 1
        });
        counts[i] += 1;
    }
    let classes = counts.len();
    let mean = dataset.len() as f64 / classes as f64;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / classes as f64;
    Ok(DatasetStats {
        images: dataset.len(),
        classes,
        mean_per_class: mean,
        std_per_class: var.sqrt(),
    })
}

/// Mean similarity over all same-identity pairs and over all
/// different-identity pairs. Quadratic in the dataset size.
pub fn mean_similarities(dataset: &[LabeledEmbedding]) -> (f64, f64) {
    let (mut within, mut nw, mut between, mut nb) = (0.0, 0usize, 0.0, 0usize);
    for (i, a) in dataset.iter().enumerate() {
        for b in &dataset[i + 1..] {
            let s = a.embedding.similarity_unchecked(&b.embedding);
            if a.label == b.label {
                within += s;
                nw += 1;
            } else {
                between += s;
                nb += 1;
            }
        }
    }
    (within / nw.max(1) as f64, between / nb.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::UNIT_NORM_TOLERANCE;

    fn item(label: &str) -> LabeledEmbedding {
        LabeledEmbedding::from_raw(&[1.0, 0.0], label, "").unwrap()
    }

    #[test]
    fn single_sample() {
        let cfg = SynthConfig {
            num_classes: 1,
            dim: 4,
            samples_per_class: SamplesPerClass::Fixed(1),
            concentration: 3.0,
            seed: 5,
        };
        let data = generate(&cfg).unwrap();
        assert_eq!(data.len(), 1);
        assert!((data[0].embedding.norm() - 1.0).abs() <= UNIT_NORM_TOLERANCE);
        assert_eq!(data[0].label.as_str(), "class_0001");
    }

    #[test]
    fn high_concentration_collapses_classes() {
        let cfg = SynthConfig {
            num_classes: 2,
            dim: 16,
            samples_per_class: SamplesPerClass::Fixed(2),
            concentration: 1e6,
            seed: 1,
        };
        let data = generate(&cfg).unwrap();
        assert_eq!(data.len(), 4);
        assert!(data[0].embedding.similarity(&data[1].embedding).unwrap() > 0.999);
        assert!(data[2].embedding.similarity(&data[3].embedding).unwrap() > 0.999);
    }

    #[test]
    fn generation_is_deterministic_and_class_major() {
        let cfg = SynthConfig::lfw_like(50, 8, 5.0, 77);
        let a = generate(&cfg).unwrap();
        assert_eq!(a, generate(&cfg).unwrap());
        let labels: Vec<_> = a.iter().map(|d| d.label.clone()).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(labels, sorted);
        assert_ne!(a, generate(&SynthConfig { seed: 78, ..cfg }).unwrap());
    }

    #[test]
    fn counts_follow_configuration() {
        let cfg = SynthConfig {
            num_classes: 30,
            dim: 4,
            samples_per_class: SamplesPerClass::Empirical(vec![2, 5]),
            concentration: 1.0,
            seed: 3,
        };
        let data = generate(&cfg).unwrap();
        let stats = summarize(&data).unwrap();
        assert_eq!(stats.classes, 30);
        let mut per: HashMap<_, usize> = HashMap::new();
        for d in &data {
            *per.entry(d.label.clone()).or_default() += 1;
        }
        assert!(per.values().all(|&c| c == 2 || c == 5));
    }

    #[test]
    fn invalid_configs() {
        let ok = SynthConfig::lfw_like(3, 8, 1.0, 0);
        assert!(generate(&SynthConfig { num_classes: 0, ..ok.clone() }).is_err());
        assert!(generate(&SynthConfig { dim: 1, ..ok.clone() }).is_err());
        assert!(generate(&SynthConfig { concentration: 0.0, ..ok.clone() }).is_err());
        let bad = SamplesPerClass::GeometricMean(0.5);
        assert!(generate(&SynthConfig { samples_per_class: bad, ..ok.clone() }).is_err());
        let bad = SamplesPerClass::Empirical(vec![]);
        assert!(generate(&SynthConfig { samples_per_class: bad, ..ok }).is_err());
    }

    #[test]
    fn parse_samples_per_class() {
        assert_eq!("fixed:3".parse::<SamplesPerClass>().unwrap(), SamplesPerClass::Fixed(3));
        assert_eq!(
            "geometric:2.3".parse::<SamplesPerClass>().unwrap(),
            SamplesPerClass::GeometricMean(2.3)
        );
        assert_eq!(
            "empirical:1;4".parse::<SamplesPerClass>().unwrap(),
            SamplesPerClass::Empirical(vec![1, 4])
        );
        assert!("fixed:0".parse::<SamplesPerClass>().is_err());
        assert!("poisson:2".parse::<SamplesPerClass>().is_err());
    }

    #[test]
    fn summarize_examples() {
        let s = summarize(&[item("A"), item("A"), item("B")]).unwrap();
        assert_eq!((s.images, s.classes), (3, 2));
        assert_eq!(s.mean_per_class, 1.5);
        assert_eq!(s.std_per_class, 0.5);
        let s = summarize(&[item("A")]).unwrap();
        assert_eq!((s.mean_per_class, s.std_per_class), (1.0, 0.0));
        assert!(matches!(summarize(&[]), Err(Error::EmptyDataset)));
        assert_eq!(
            summarize(&[item("A"), item("A"), item("B")]).unwrap().to_string(),
            "3 images, 2 classes, 1.50±0.50 images/class"
        );
    }

    #[test]
    fn lfw_table_ratio() {
        assert!((13_233.0 / 5_749.0 - LFW_MEAN_PER_CLASS).abs() < 0.01);
    }
}
