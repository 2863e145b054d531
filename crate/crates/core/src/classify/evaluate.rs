use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{f1_weighted, knn_predict, stratified_split, ClassificationReport, DistanceMatrix, LabeledIndex, SplitRng, SplitSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub split: SplitSpec,
    pub k_min: usize,
    pub k_max: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig { split: SplitSpec::Fraction(0.5), k_min: 3, k_max: 12, replicates: 100, seed: 0 }
    }
}

impl EvaluationConfig {
    pub fn k_values(&self) -> impl Iterator<Item = usize> {
        self.k_min..=self.k_max
    }
}

/// Weighted F1 of one replicate split for every k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateScores {
    pub replicate: usize,
    pub f1_by_k: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSummary {
    pub k: usize,
    pub mean_f1: f64,
    /// Sample standard deviation (0 for a single replicate).
    pub std_f1: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Per-replicate scores in replicate order.
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub config: EvaluationConfig,
    pub per_k: Vec<KSummary>,
    pub best_k: usize,
    pub best_mean_f1: f64,
    /// Set when fewer than two replicates make the interval meaningless.
    pub ci_degenerate: bool,
    /// Replicate with the highest F1 at the best k.
    pub best_replicate: usize,
    pub best_run: ClassificationReport,
}

fn run_split(
    dist: &DistanceMatrix,
    labels: &[LabeledIndex],
    config: &EvaluationConfig,
    replicate: usize,
) -> Result<(Vec<LabeledIndex>, Vec<LabeledIndex>)> {
    let mut rng = SplitRng::new(config.seed, replicate as u64);
    let (train, test) = stratified_split(labels, config.split, &mut rng)?;
    if config.k_min == 0 || config.k_min > config.k_max || config.k_max > train.len() {
        return Err(Error::InvalidK { k: config.k_max, train: train.len() });
    }
    if let Some(bad) = labels.iter().find(|l| l.index >= dist.size()) {
        return Err(Error::IndexOutOfRange { index: bad.index, size: dist.size() });
    }
    Ok((train, test))
}

/// Scores one replicate. Replicates are independent, so callers may run
/// them in any order or in parallel.
pub fn replicate_scores(
    dist: &DistanceMatrix,
    labels: &[LabeledIndex],
    config: &EvaluationConfig,
    replicate: usize,
) -> Result<ReplicateScores> {
    let (train, test) = run_split(dist, labels, config, replicate)?;
    let test_idx: Vec<usize> = test.iter().map(|t| t.index).collect();
    let truth: Vec<&str> = test.iter().map(|t| t.label.as_str()).collect();
    let mut f1_by_k = Vec::new();
    for k in config.k_values() {
        let predicted = knn_predict(dist, &train, &test_idx, k)?;
        f1_by_k.push(f1_weighted(&truth, &predicted)?);
    }
    Ok(ReplicateScores { replicate, f1_by_k })
}

/// z-score of the two-sided 95% normal interval.
const Z95: f64 = 1.96;

/// Aggregates replicate scores. `scores` may arrive in any order.
pub fn summarize(
    dist: &DistanceMatrix,
    labels: &[LabeledIndex],
    config: &EvaluationConfig,
    mut scores: Vec<ReplicateScores>,
) -> Result<EvaluationSummary> {
    if scores.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    scores.sort_by_key(|s| s.replicate);
    let r = scores.len() as f64;
    let per_k: Vec<KSummary> = config
        .k_values()
        .enumerate()
        .map(|(slot, k)| {
            let values: Vec<f64> = scores.iter().map(|s| s.f1_by_k[slot]).collect();
            let mean = values.iter().sum::<f64>() / r;
            let std = if values.len() > 1 {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0)).sqrt()
            } else {
                0.0
            };
            let half = Z95 * std / r.sqrt();
            KSummary { k, mean_f1: mean, std_f1: std, ci_low: mean - half, ci_high: mean + half, scores: values }
        })
        .collect();
    let best = per_k.iter().fold(&per_k[0], |best, s| if s.mean_f1 > best.mean_f1 { s } else { best });
    let best_slot = best.k - config.k_min;
    let best_replicate = scores
        .iter()
        .fold(&scores[0], |b, s| if s.f1_by_k[best_slot] > b.f1_by_k[best_slot] { s } else { b })
        .replicate;

    let (train, test) = run_split(dist, labels, config, best_replicate)?;
    let test_idx: Vec<usize> = test.iter().map(|t| t.index).collect();
    let truth: Vec<&str> = test.iter().map(|t| t.label.as_str()).collect();
    let predicted = knn_predict(dist, &train, &test_idx, best.k)?;
    let classes: Vec<String> =
        labels.iter().map(|l| l.label.clone()).collect::<BTreeSet<String>>().into_iter().collect();
    let best_run = ClassificationReport::from_predictions(&truth, &predicted, &classes, best.k)?;

    Ok(EvaluationSummary {
        config: *config,
        best_k: best.k,
        best_mean_f1: best.mean_f1,
        per_k,
        ci_degenerate: scores.len() < 2,
        best_replicate,
        best_run,
    })
}

/// Runs every replicate sequentially and summarizes.
pub fn evaluate(dist: &DistanceMatrix, labels: &[LabeledIndex], config: &EvaluationConfig) -> Result<EvaluationSummary> {
    let scores = (0..config.replicates)
        .map(|r| replicate_scores(dist, labels, config, r))
        .collect::<Result<Vec<_>>>()?;
    summarize(dist, labels, config, scores)
}
