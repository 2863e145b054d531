//! Distance-matrix classification: k-NN, weighted F1, confusion matrices and
//! seeded replicate evaluation.

mod evaluate;
mod knn;
mod metrics;
mod split;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use evaluate::{
    evaluate, replicate_scores, summarize, EvaluationConfig, EvaluationSummary, KSummary, ReplicateScores,
};
pub use knn::knn_predict;
pub use metrics::{confusion, f1_weighted, ClassificationReport};
pub use split::{stratified_split, SplitRng, SplitSpec};

/// Symmetric pairwise distances between `ids`, with the method and
/// parameters that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    entries: Vec<f64>,
    pub method: String,
    pub params: BTreeMap<String, String>,
}

/// Largest tolerated `|d(i,j) - d(j,i)|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

impl DistanceMatrix {
    /// Wraps a full row-major `n × n` matrix after checking the invariants.
    pub fn new(
        ids: Vec<String>,
        entries: Vec<f64>,
        method: impl Into<String>,
        params: BTreeMap<String, String>,
    ) -> Result<Self> {
        let n = ids.len();
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        let m = DistanceMatrix { ids, entries, method: method.into(), params };
        m.validate()?;
        Ok(m)
    }

    /// Builds the matrix from the strictly upper triangle, listed row by row
    /// (`(0,1), (0,2), …, (n-2,n-1)`).
    pub fn from_upper(
        ids: Vec<String>,
        upper: &[f64],
        method: impl Into<String>,
        params: BTreeMap<String, String>,
    ) -> Result<Self> {
        let n = ids.len();
        let expected = n * n.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: upper.len() });
        }
        let mut entries = vec![0.0; n * n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in i + 1..n {
                let d = *it.next().unwrap();
                entries[i * n + j] = d;
                entries[j * n + i] = d;
            }
        }
        DistanceMatrix::new(ids, entries, method, params)
    }

    /// Evaluates `f(i, j)` once per unordered pair `i < j` and mirrors it.
    pub fn from_fn<F>(ids: Vec<String>, method: impl Into<String>, params: BTreeMap<String, String>, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<f64>,
    {
        let n = ids.len();
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(f(i, j)?);
            }
        }
        DistanceMatrix::from_upper(ids, &upper, method, params)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.ids.len();
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::InvalidMatrix("non-zero diagonal"));
            }
            for j in 0..n {
                let d = self.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidMatrix("entries must be finite and non-negative"));
                }
                if (d - self.get(j, i)).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::InvalidMatrix("matrix is not symmetric"));
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.entries[i * n..(i + 1) * n]
    }

    /// Strictly upper triangle, row by row.
    pub fn upper(&self) -> Vec<f64> {
        let n = self.ids.len();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            out.extend_from_slice(&self.row(i)[i + 1..]);
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.ids.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// The same matrix with every entry passed through `f` (diagonal kept 0).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = self.ids.len();
        let entries = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { f(self.entries[k]) }).collect();
        DistanceMatrix::new(self.ids.clone(), entries, self.method.clone(), self.params.clone())
    }
}

/// A row of the distance matrix together with its class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledIndex {
    pub index: usize,
    pub label: String,
}

impl LabeledIndex {
    pub fn new(index: usize, label: impl Into<String>) -> Self {
        LabeledIndex { index, label: label.into() }
    }
}
