//! Fixed-threshold baseline: verification pair sampling and k-fold
//! cross-validated accuracy-optimal threshold selection.

use std::collections::{HashMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{common_dim, IdentityLabel, LabeledEmbedding};
use crate::error::{Error, Result};

pub const DEFAULT_PAIR_COUNT: usize = 6000;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_POSITIVE_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationPair {
    pub index_a: usize,
    pub index_b: usize,
    pub same_identity: bool,
    pub score: f64,
}

/// Which side of each fold-splitting picks the threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvSelection {
    /// Pick on the training folds, score on the held-out fold.
    #[default]
    Train,
    /// Pick and score on the held-out fold.
    Test,
}

impl std::str::FromStr for CvSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(CvSelection::Train),
            "test" => Ok(CvSelection::Test),
            _ => Err(Error::InvalidConfig(format!("expected train or test, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// Mean of the per-fold thresholds.
    pub threshold: f64,
    pub per_fold_thresholds: Vec<f64>,
    pub per_fold_accuracy: Vec<f64>,
    pub pair_count: usize,
}

/// Draws `count` verification pairs, half same-identity and half
/// different-identity. See [`sample_pairs_with`].
pub fn sample_pairs(dataset: &[LabeledEmbedding], count: usize, seed: u64) -> Result<Vec<VerificationPair>> {
    sample_pairs_with(dataset, count, DEFAULT_POSITIVE_FRACTION, seed)
}

/// Draws `count` distinct unordered pairs, aiming for
/// `round(count * positive_fraction)` same-identity pairs.
///
/// Each category is sampled uniformly without replacement. When one category
/// has fewer distinct pairs than its target, the other category makes up the
/// difference.
pub fn sample_pairs_with(
    dataset: &[LabeledEmbedding],
    count: usize,
    positive_fraction: f64,
    seed: u64,
) -> Result<Vec<VerificationPair>> {
    if !(0.0..=1.0).contains(&positive_fraction) {
        return Err(Error::InvalidConfig(format!(
            "positive fraction {positive_fraction} is outside [0, 1]"
        )));
    }
    if dataset.len() < 2 {
        return Err(Error::InsufficientData("need at least two embeddings to form a pair".into()));
    }
    common_dim(dataset)?;

    let groups = group_by_label(dataset);
    let n = dataset.len();
    let total_pairs = n * (n - 1) / 2;
    let positive_total: usize = groups.iter().map(|g| g.len() * (g.len().saturating_sub(1)) / 2).sum();
    let negative_total = total_pairs - positive_total;
    if count == 0 {
        return Err(Error::InvalidConfig("pair count must be positive".into()));
    }
    if count > total_pairs {
        return Err(Error::InsufficientData(format!(
            "requested {count} pairs but only {total_pairs} distinct pairs exist"
        )));
    }

    let target_pos = ((count as f64) * positive_fraction).round() as usize;
    let mut n_pos = target_pos.min(positive_total);
    let n_neg = (count - n_pos).min(negative_total);
    n_pos = count - n_neg;

    let mut rng = crate::seeded_rng(seed);

    let positives: Vec<(usize, usize)> = groups
        .iter()
        .flat_map(|g| {
            g.iter()
                .enumerate()
                .flat_map(move |(k, &a)| g[k + 1..].iter().map(move |&b| (a, b)))
        })
        .collect();
    let mut chosen: Vec<(usize, usize, bool)> = index::sample(&mut rng, positives.len(), n_pos)
        .into_iter()
        .map(|i| (positives[i].0, positives[i].1, true))
        .collect();

    let labels: Vec<&IdentityLabel> = dataset.iter().map(|d| &d.label).collect();
    if n_neg * 2 > negative_total {
        // Dense request: enumerate every foreign pair and subsample.
        let negatives: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| labels[a] != labels[b])
            .collect();
        chosen.extend(
            index::sample(&mut rng, negatives.len(), n_neg)
                .into_iter()
                .map(|i| (negatives[i].0, negatives[i].1, false)),
        );
    } else {
        let mut seen = HashSet::with_capacity(n_neg);
        while seen.len() < n_neg {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b || labels[a] == labels[b] {
                continue;
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key) {
                chosen.push((key.0, key.1, false));
            }
        }
    }
    chosen.shuffle(&mut rng);

    Ok(chosen
        .into_iter()
        .map(|(a, b, same)| VerificationPair {
            index_a: a,
            index_b: b,
            same_identity: same,
            score: dataset[a].embedding.similarity_unchecked(&dataset[b].embedding),
        })
        .collect())
}

/// Index groups per identity, in order of first appearance.
fn group_by_label(dataset: &[LabeledEmbedding]) -> Vec<Vec<usize>> {
    let mut slot: HashMap<&IdentityLabel, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, item) in dataset.iter().enumerate() {
        let g = *slot.entry(&item.label).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

/// Fraction of pairs judged correctly when accepting iff `score >= threshold`.
pub fn verification_accuracy<'a, I>(pairs: I, threshold: f64) -> f64
where
    I: IntoIterator<Item = &'a VerificationPair>,
{
    let (mut correct, mut total) = (0usize, 0usize);
    for p in pairs {
        total += 1;
        if (p.score >= threshold) == p.same_identity {
            correct += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

/// Candidate thresholds for a set of scores: midpoints between adjacent
/// distinct scores, plus one candidate below the minimum (accept all) and one
/// above the maximum (reject all), both kept inside `[-1, 1]`. Ascending.
pub fn candidate_thresholds(scores: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.into_iter().collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let (Some(&lo), Some(&hi)) = (distinct.first(), distinct.last()) else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(distinct.len() + 1);
    out.push(midpoint(-1.0, lo));
    out.extend(distinct.windows(2).map(|w| midpoint(w[0], w[1])));
    out.push(midpoint(hi, 1.0));
    out
}

fn midpoint(a: f64, b: f64) -> f64 {
    (a + b) / 2.0
}

/// Accuracy-maximizing threshold over [`candidate_thresholds`]; the smallest
/// candidate wins ties. Returns `(threshold, accuracy)`.
pub fn select_threshold(pairs: &[&VerificationPair]) -> Option<(f64, f64)> {
    if pairs.is_empty() {
        return None;
    }
    let mut sorted: Vec<(f64, bool)> = pairs.iter().map(|p| (p.score, p.same_identity)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let total = sorted.len();
    // Lowest candidate accepts everything: positives are right, negatives wrong.
    let mut correct = sorted.iter().filter(|(_, same)| *same).count() as i64;
    let lowest = sorted[0].0;
    let mut best = (midpoint(-1.0, lowest), correct);

    let mut i = 0;
    while i < total {
        let score = sorted[i].0;
        while i < total && sorted[i].0 == score {
            correct += if sorted[i].1 { -1 } else { 1 };
            i += 1;
        }
        let candidate = match sorted.get(i) {
            Some(&(next, _)) => midpoint(score, next),
            None => midpoint(score, 1.0),
        };
        if correct > best.1 {
            best = (candidate, correct);
        }
    }
    Some((best.0, best.1 as f64 / total as f64))
}

/// One fold-splitting: the held-out fold and everything else.
#[derive(Debug)]
pub struct CvSplit<'a> {
    pub train: Vec<&'a VerificationPair>,
    pub held_out: Vec<&'a VerificationPair>,
}

/// Shuffles `pairs` by `seed` and cuts them into `folds` contiguous folds
/// whose sizes differ by at most one.
pub fn cv_splits(pairs: &[VerificationPair], folds: usize, seed: u64) -> Vec<CvSplit<'_>> {
    let mut order: Vec<&VerificationPair> = pairs.iter().collect();
    order.shuffle(&mut crate::seeded_rng(seed));
    let n = order.len();
    let bounds: Vec<usize> = (0..=folds).map(|k| k * n / folds).collect();
    (0..folds)
        .map(|k| CvSplit {
            train: order[..bounds[k]].iter().chain(&order[bounds[k + 1]..]).copied().collect(),
            held_out: order[bounds[k]..bounds[k + 1]].to_vec(),
        })
        .collect()
}

/// 10-fold-style cross-validated threshold with the default selection side.
pub fn calibrate_fixed_threshold(pairs: &[VerificationPair], folds: usize, seed: u64) -> Result<CalibrationResult> {
    calibrate_with(pairs, folds, seed, CvSelection::Train)
}

/// Picks one threshold per fold-splitting of [`cv_splits`] and averages them.
pub fn calibrate_with(
    pairs: &[VerificationPair],
    folds: usize,
    seed: u64,
    select_on: CvSelection,
) -> Result<CalibrationResult> {
    if folds < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    if pairs.len() < folds {
        return Err(Error::InsufficientData(format!(
            "{} pairs cannot fill {folds} folds",
            pairs.len()
        )));
    }
    if !pairs.iter().any(|p| p.same_identity) || pairs.iter().all(|p| p.same_identity) {
        return Err(Error::InsufficientData(
            "calibration needs both same-identity and different-identity pairs".into(),
        ));
    }

    let mut per_fold_thresholds = Vec::with_capacity(folds);
    let mut per_fold_accuracy = Vec::with_capacity(folds);
    for split in cv_splits(pairs, folds, seed) {
        let selection = match select_on {
            CvSelection::Train => &split.train,
            CvSelection::Test => &split.held_out,
        };
        let (threshold, _) = select_threshold(selection).expect("folds are non-empty");
        per_fold_thresholds.push(threshold);
        per_fold_accuracy.push(verification_accuracy(split.held_out.iter().copied(), threshold));
    }
    let threshold = per_fold_thresholds.iter().sum::<f64>() / folds as f64;
    Ok(CalibrationResult {
        threshold,
        per_fold_thresholds,
        per_fold_accuracy,
        pair_count: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(score: f64, same: bool) -> VerificationPair {
        VerificationPair {
            index_a: 0,
            index_b: 1,
            same_identity: same,
            score,
        }
    }

    fn item(v: &[f64], label: &str) -> LabeledEmbedding {
        LabeledEmbedding::from_raw(v, label, "").unwrap()
    }

    // Exhaustive oracle: try every candidate, keep the first strict improvement.
    fn brute_select(pairs: &[&VerificationPair]) -> (f64, f64) {
        let mut best = (f64::NAN, -1.0);
        for c in candidate_thresholds(pairs.iter().map(|p| p.score)) {
            let acc = verification_accuracy(pairs.iter().copied(), c);
            if acc > best.1 {
                best = (c, acc);
            }
        }
        best
    }

    #[test]
    fn candidates_are_midpoints_with_sentinels() {
        let c = candidate_thresholds([0.4, 0.2, 0.4, 0.8]);
        assert_eq!(c, vec![-0.4, 0.30000000000000004, 0.6000000000000001, 0.9]);
        assert!(candidate_thresholds([]).is_empty());
    }

    #[test]
    fn separable_scores_pick_single_midpoint() {
        let pairs: Vec<_> = (0..20).map(|i| pair(if i % 2 == 0 { 0.9 } else { 0.1 }, i % 2 == 0)).collect();
        let r = calibrate_fixed_threshold(&pairs, 10, 7).unwrap();
        assert!(r.per_fold_thresholds.iter().all(|&t| t == 0.5));
        assert_eq!(r.threshold, 0.5);
        assert!(r.per_fold_accuracy.iter().all(|&a| a == 1.0));
        assert_eq!(r.pair_count, 20);
    }

    #[test]
    fn four_level_scores_pick_gap_midpoint() {
        let base = [(0.8, true), (0.6, true), (0.4, false), (0.2, false)];
        let pairs: Vec<_> = (0..20).map(|i| pair(base[i % 4].0, base[i % 4].1)).collect();
        for seed in 0..5 {
            let r = calibrate_fixed_threshold(&pairs, 10, seed).unwrap();
            assert!(r.per_fold_thresholds.iter().all(|&t| t == 0.5), "{r:?}");
            // the brute oracle agrees on the full set
            let all: Vec<&VerificationPair> = pairs.iter().collect();
            assert_eq!(brute_select(&all).0, 0.5);
        }
    }

    #[test]
    fn select_matches_brute_force_with_ties() {
        let raw = [
            (0.3, true), (0.3, false), (0.5, false), (0.5, true), (0.7, true),
            (0.1, false), (0.9, false), (0.7, false), (0.2, true),
        ];
        let pairs: Vec<_> = raw.iter().map(|&(s, l)| pair(s, l)).collect();
        let refs: Vec<&VerificationPair> = pairs.iter().collect();
        let (t, acc) = select_threshold(&refs).unwrap();
        let (bt, bacc) = brute_select(&refs);
        assert_eq!(t, bt);
        assert_eq!(acc, bacc);
    }

    #[test]
    fn calibration_preconditions() {
        let only_pos: Vec<_> = (0..20).map(|_| pair(0.7, true)).collect();
        assert!(matches!(
            calibrate_fixed_threshold(&only_pos, 10, 0),
            Err(Error::InsufficientData(_))
        ));
        let few: Vec<_> = (0..5).map(|i| pair(0.1 * i as f64, i % 2 == 0)).collect();
        assert!(matches!(calibrate_fixed_threshold(&few, 10, 0), Err(Error::InsufficientData(_))));
        assert!(matches!(calibrate_fixed_threshold(&few, 1, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn calibration_is_deterministic() {
        let pairs: Vec<_> = (0..97).map(|i| pair(((i * 37) % 100) as f64 / 100.0, i % 3 != 0)).collect();
        let a = calibrate_fixed_threshold(&pairs, 10, 42).unwrap();
        let b = calibrate_fixed_threshold(&pairs, 10, 42).unwrap();
        assert_eq!(a, b);
        let mean = a.per_fold_thresholds.iter().sum::<f64>() / 10.0;
        assert_eq!(a.threshold, mean);
    }

    #[test]
    fn test_side_selection_scores_held_out_fold() {
        let pairs: Vec<_> = (0..40).map(|i| pair(((i * 13) % 40) as f64 / 40.0, i % 2 == 0)).collect();
        let r = calibrate_with(&pairs, 4, 1, CvSelection::Test).unwrap();
        assert_eq!(r.per_fold_thresholds.len(), 4);
        assert_eq!("test".parse::<CvSelection>().unwrap(), CvSelection::Test);
    }

    #[test]
    fn sample_single_pair_of_same_identity() {
        let data = vec![item(&[1.0, 0.0], "A"), item(&[0.0, 1.0], "A")];
        let pairs = sample_pairs(&data, 1, 3).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].same_identity);
        assert_eq!(pairs[0].score, 0.0);
    }

    #[test]
    fn sample_balances_two_by_two() {
        let data = vec![
            item(&[1.0, 0.0], "A"),
            item(&[0.9, 0.1], "A"),
            item(&[0.0, 1.0], "B"),
            item(&[0.1, 0.9], "B"),
        ];
        for seed in 0..10 {
            let pairs = sample_pairs(&data, 2, seed).unwrap();
            assert_eq!(pairs.iter().filter(|p| p.same_identity).count(), 1);
            assert_eq!(pairs.iter().filter(|p| !p.same_identity).count(), 1);
        }
    }

    #[test]
    fn sample_tops_up_with_negatives_and_is_distinct() {
        // 2 positive pairs exist (A×2, B×2); the rest must be negative.
        let data = vec![
            item(&[1.0, 0.0], "A"),
            item(&[0.9, 0.1], "A"),
            item(&[0.0, 1.0], "B"),
            item(&[0.1, 0.9], "B"),
            item(&[0.5, 0.5], "C"),
        ];
        let pairs = sample_pairs(&data, 8, 11).unwrap();
        assert_eq!(pairs.len(), 8);
        assert_eq!(pairs.iter().filter(|p| p.same_identity).count(), 2);
        let keys: HashSet<_> = pairs.iter().map(|p| (p.index_a, p.index_b)).collect();
        assert_eq!(keys.len(), 8);
        for p in &pairs {
            assert!(p.index_a < p.index_b);
            assert_eq!(p.same_identity, data[p.index_a].label == data[p.index_b].label);
        }
        assert_eq!(pairs, sample_pairs(&data, 8, 11).unwrap());
        assert!(matches!(sample_pairs(&data, 11, 0), Err(Error::InsufficientData(_))));
        assert!(matches!(sample_pairs(&data[..1], 1, 0), Err(Error::InsufficientData(_))));
    }
}
