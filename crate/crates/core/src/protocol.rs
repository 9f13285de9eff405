//! Timeline evaluation: every probe is recognized against the gallery as it
//! stands, classified into one of five outcomes, and then enrolled under its
//! true identity. The gallery starts empty.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{common_dim, IdentityLabel, LabeledEmbedding};
use crate::error::{Error, Result};
use crate::gallery::{Gallery, EMPTY_GALLERY_SCORE};
use crate::policy::ThresholdPolicy;

pub const DEFAULT_REPETITIONS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    TrueAccept,
    FalseReject,
    FalseAccept,
    TrueReject,
    IdentificationError,
}

impl OutcomeKind {
    pub const ALL: [OutcomeKind; 5] = [
        OutcomeKind::TrueAccept,
        OutcomeKind::FalseReject,
        OutcomeKind::FalseAccept,
        OutcomeKind::TrueReject,
        OutcomeKind::IdentificationError,
    ];

    /// Only true accepts and true rejects count as correct.
    pub fn is_correct(self) -> bool {
        matches!(self, OutcomeKind::TrueAccept | OutcomeKind::TrueReject)
    }

    pub fn code(self) -> &'static str {
        match self {
            OutcomeKind::TrueAccept => "TA",
            OutcomeKind::FalseReject => "FR",
            OutcomeKind::FalseAccept => "FA",
            OutcomeKind::TrueReject => "TR",
            OutcomeKind::IdentificationError => "IE",
        }
    }
}

/// Classifies one probe.
///
/// `enrolled` says whether `true_label` already has an entry in the gallery.
/// `best_label` is `None` only for an empty gallery, which always rejects.
pub fn classify_outcome(
    score: f64,
    phi: f64,
    true_label: &IdentityLabel,
    best_label: Option<&IdentityLabel>,
    enrolled: bool,
) -> OutcomeKind {
    let accepted = best_label.is_some() && score >= phi;
    match (accepted, enrolled) {
        (true, _) if best_label == Some(true_label) => OutcomeKind::TrueAccept,
        (true, true) => OutcomeKind::IdentificationError,
        (true, false) => OutcomeKind::FalseAccept,
        (false, true) => OutcomeKind::FalseReject,
        (false, false) => OutcomeKind::TrueReject,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    /// 1-based position on the timeline.
    pub step: usize,
    pub kind: OutcomeKind,
    pub score: f64,
    pub phi: f64,
    pub best_index: Option<usize>,
    pub best_label: Option<IdentityLabel>,
    pub true_label: IdentityLabel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub true_accept: usize,
    pub false_reject: usize,
    pub false_accept: usize,
    pub true_reject: usize,
    pub identification_error: usize,
}

impl OutcomeCounts {
    pub fn record(&mut self, kind: OutcomeKind) {
        *self.slot(kind) += 1;
    }

    pub fn get(&self, kind: OutcomeKind) -> usize {
        match kind {
            OutcomeKind::TrueAccept => self.true_accept,
            OutcomeKind::FalseReject => self.false_reject,
            OutcomeKind::FalseAccept => self.false_accept,
            OutcomeKind::TrueReject => self.true_reject,
            OutcomeKind::IdentificationError => self.identification_error,
        }
    }

    fn slot(&mut self, kind: OutcomeKind) -> &mut usize {
        match kind {
            OutcomeKind::TrueAccept => &mut self.true_accept,
            OutcomeKind::FalseReject => &mut self.false_reject,
            OutcomeKind::FalseAccept => &mut self.false_accept,
            OutcomeKind::TrueReject => &mut self.true_reject,
            OutcomeKind::IdentificationError => &mut self.identification_error,
        }
    }

    pub fn total(&self) -> usize {
        OutcomeKind::ALL.iter().map(|&k| self.get(k)).sum()
    }

    pub fn correct(&self) -> usize {
        self.true_accept + self.true_reject
    }
}

/// Parameters echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub policy: ThresholdPolicy,
    pub initial_threshold: f64,
    pub probes: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: RunConfig,
    /// Shuffle seed, when the probe order came from one.
    pub seed: Option<u64>,
    pub final_acc: f64,
    pub counts: OutcomeCounts,
    /// Cumulative accuracy after each step.
    pub temporary_accuracy: Vec<f64>,
    pub outcomes: Vec<ProbeOutcome>,
}

impl EvalReport {
    /// Accuracy recomputed from the outcome log.
    pub fn recomputed_acc(&self) -> f64 {
        let correct = self.outcomes.iter().filter(|o| o.kind.is_correct()).count();
        correct as f64 / self.outcomes.len() as f64
    }
}

/// Runs the timeline over `dataset` in the given order.
pub fn run_protocol(
    dataset: &[LabeledEmbedding],
    policy: ThresholdPolicy,
    initial_threshold: f64,
) -> Result<EvalReport> {
    run_protocol_with_gallery(dataset, policy, initial_threshold).map(|(report, _)| report)
}

/// Like [`run_protocol`], also returning the final gallery.
pub fn run_protocol_with_gallery(
    dataset: &[LabeledEmbedding],
    policy: ThresholdPolicy,
    initial_threshold: f64,
) -> Result<(EvalReport, Gallery)> {
    let dim = common_dim(dataset)?;
    let mut gallery = Gallery::new(initial_threshold)?;
    let total = dataset.len();

    let mut outcomes = Vec::with_capacity(total);
    let mut temporary_accuracy = Vec::with_capacity(total);
    let mut counts = OutcomeCounts::default();

    for (i, probe) in dataset.iter().enumerate() {
        // One pass of similarities serves both recognition and registration.
        let scores = gallery.scores(&probe.embedding)?;
        let result = gallery.decide(&scores, &policy)?;
        let best_label = result
            .best_index
            .and_then(|u| gallery.entry(u))
            .map(|e| e.label.clone());
        let kind = classify_outcome(
            result.score,
            result.threshold_used,
            &probe.label,
            best_label.as_ref(),
            gallery.contains_label(&probe.label),
        );
        counts.record(kind);
        let step = i + 1;
        temporary_accuracy.push(counts.correct() as f64 / step as f64);
        outcomes.push(ProbeOutcome {
            step,
            kind,
            score: result.score,
            phi: result.threshold_used,
            best_index: result.best_index,
            best_label,
            true_label: probe.label.clone(),
        });
        gallery.register_scored(probe.clone(), &scores);
    }

    debug_assert!(outcomes.first().is_none_or(|o| o.score == EMPTY_GALLERY_SCORE));
    let report = EvalReport {
        config: RunConfig {
            policy,
            initial_threshold,
            probes: total,
            dim,
        },
        seed: None,
        final_acc: counts.correct() as f64 / total as f64,
        counts,
        temporary_accuracy,
        outcomes,
    };
    Ok((report, gallery))
}

/// Returns a copy of `dataset` in a seed-determined random order.
pub fn shuffled(dataset: &[LabeledEmbedding], seed: u64) -> Vec<LabeledEmbedding> {
    let mut out = dataset.to_vec();
    out.shuffle(&mut crate::seeded_rng(seed));
    out
}

/// Seed of the `run`-th shuffle of an experiment seeded with `seed`.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    seed.wrapping_add(run as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub final_acc: f64,
    pub counts: OutcomeCounts,
}

/// Aggregate over repeated shuffled runs of one policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub policy: ThresholdPolicy,
    pub initial_threshold: f64,
    pub seed: u64,
    pub repetitions: usize,
    pub mean_acc: f64,
    /// Population standard deviation of the per-run accuracies.
    pub std_acc: f64,
    pub summaries: Vec<RunSummary>,
    /// Step-wise mean of the runs' temporary-accuracy curves.
    pub mean_curve: Vec<f64>,
    /// Full per-run reports; not serialized.
    #[serde(skip)]
    pub runs: Vec<EvalReport>,
}

impl ExperimentReport {
    pub fn per_run_acc(&self) -> Vec<f64> {
        self.summaries.iter().map(|s| s.final_acc).collect()
    }

    fn from_runs(policy: ThresholdPolicy, initial_threshold: f64, seed: u64, runs: Vec<EvalReport>) -> Self {
        let n = runs.len() as f64;
        let mean_acc = runs.iter().map(|r| r.final_acc).sum::<f64>() / n;
        let var = runs.iter().map(|r| (r.final_acc - mean_acc).powi(2)).sum::<f64>() / n;
        let steps = runs[0].temporary_accuracy.len();
        let mean_curve = (0..steps)
            .map(|t| runs.iter().map(|r| r.temporary_accuracy[t]).sum::<f64>() / n)
            .collect();
        let summaries = runs
            .iter()
            .map(|r| RunSummary {
                seed: r.seed.unwrap_or(seed),
                final_acc: r.final_acc,
                counts: r.counts,
            })
            .collect();
        Self {
            policy,
            initial_threshold,
            seed,
            repetitions: runs.len(),
            mean_acc,
            std_acc: var.sqrt(),
            summaries,
            mean_curve,
            runs,
        }
    }
}

/// Runs the protocol over `repetitions` shuffles; run `i` uses seed `seed + i`.
pub fn run_experiment(
    dataset: &[LabeledEmbedding],
    policy: ThresholdPolicy,
    initial_threshold: f64,
    repetitions: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
    }
    common_dim(dataset)?;
    let runs = (0..repetitions)
        .into_par_iter()
        .map(|i| {
            let s = run_seed(seed, i);
            let mut report = run_protocol(&shuffled(dataset, s), policy, initial_threshold)?;
            report.seed = Some(s);
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::from_runs(policy, initial_threshold, seed, runs))
}

/// Adaptive and fixed policies evaluated on the same shuffles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub adaptive: ExperimentReport,
    pub fixed: ExperimentReport,
}

impl Comparison {
    /// Mean adaptive accuracy minus mean fixed accuracy.
    pub fn gain(&self) -> f64 {
        self.adaptive.mean_acc - self.fixed.mean_acc
    }
}

/// Evaluates `Fixed(threshold)` and `Adaptive` seeded with the same value as
/// its initial threshold, over identical registration orders.
pub fn run_comparison(
    dataset: &[LabeledEmbedding],
    threshold: f64,
    repetitions: usize,
    seed: u64,
) -> Result<Comparison> {
    let fixed = ThresholdPolicy::fixed(threshold)?;
    let (adaptive, fixed) = rayon::join(
        || run_experiment(dataset, ThresholdPolicy::Adaptive, threshold, repetitions, seed),
        || run_experiment(dataset, fixed, threshold, repetitions, seed),
    );
    Ok(Comparison {
        adaptive: adaptive?,
        fixed: fixed?,
    })
}
