use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Counts with rows = true class and columns = predicted class, both in
/// `class_order`.
pub fn confusion<T: AsRef<str>, U: AsRef<str>>(
    truth: &[T],
    predicted: &[U],
    class_order: &[String],
) -> Result<Vec<Vec<usize>>> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch(truth.len(), predicted.len()));
    }
    let position = |label: &str| {
        class_order.iter().position(|c| c == label).ok_or_else(|| Error::UnknownLabel(String::from(label)))
    };
    let c = class_order.len();
    let mut matrix = vec![vec![0usize; c]; c];
    for (t, p) in truth.iter().zip(predicted) {
        matrix[position(t.as_ref())?][position(p.as_ref())?] += 1;
    }
    Ok(matrix)
}

/// Per-class scores and the support-weighted F1 of one prediction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classes: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub support: Vec<usize>,
    pub f1_weighted: f64,
    pub k_used: usize,
}

impl ClassificationReport {
    /// Derives every score from a confusion matrix. Undefined ratios
    /// (no predictions, no support) count as 0.
    pub fn from_confusion(classes: Vec<String>, confusion: Vec<Vec<usize>>, k_used: usize) -> Self {
        let c = classes.len();
        let support: Vec<usize> = confusion.iter().map(|row| row.iter().sum()).collect();
        let predicted: Vec<usize> = (0..c).map(|j| confusion.iter().map(|row| row[j]).sum()).collect();
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision: Vec<f64> = (0..c).map(|i| ratio(confusion[i][i], predicted[i])).collect();
        let recall: Vec<f64> = (0..c).map(|i| ratio(confusion[i][i], support[i])).collect();
        let f1: Vec<f64> = precision
            .iter()
            .zip(&recall)
            .map(|(&p, &r)| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
            .collect();
        let total: usize = support.iter().sum();
        let f1_weighted = if total == 0 {
            0.0
        } else {
            f1.iter().zip(&support).map(|(f, &s)| f * s as f64).sum::<f64>() / total as f64
        };
        ClassificationReport { classes, confusion, precision, recall, f1, support, f1_weighted, k_used }
    }

    pub fn from_predictions<T: AsRef<str>, U: AsRef<str>>(
        truth: &[T],
        predicted: &[U],
        class_order: &[String],
        k_used: usize,
    ) -> Result<Self> {
        let matrix = confusion(truth, predicted, class_order)?;
        Ok(ClassificationReport::from_confusion(class_order.to_vec(), matrix, k_used))
    }
}

/// Support-weighted mean of per-class F1 (`average="weighted"` semantics).
pub fn f1_weighted<T: AsRef<str>, U: AsRef<str>>(truth: &[T], predicted: &[U]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch(truth.len(), predicted.len()));
    }
    if truth.is_empty() {
        return Err(Error::LengthMismatch(0, 0));
    }
    let classes: Vec<String> = truth
        .iter()
        .map(|t| t.as_ref())
        .chain(predicted.iter().map(|p| p.as_ref()))
        .collect::<BTreeSet<&str>>()
        .into_iter()
        .map(String::from)
        .collect();
    Ok(ClassificationReport::from_predictions(truth, predicted, &classes, 0)?.f1_weighted)
}
