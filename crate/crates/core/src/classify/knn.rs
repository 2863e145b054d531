use alloc::string::String;
use alloc::vec::Vec;

use super::{DistanceMatrix, LabeledIndex};
use crate::{Error, Result};

/// Predicts each test row's class from its `k` nearest training rows.
///
/// Neighbors are ordered by distance, equal distances by index. The majority
/// label wins; a tie in counts goes to the class with the smaller summed
/// neighbor distance, then to the lexicographically smaller label.
pub fn knn_predict(dist: &DistanceMatrix, train: &[LabeledIndex], test: &[usize], k: usize) -> Result<Vec<String>> {
    if train.is_empty() {
        return Err(Error::EmptyTrain);
    }
    if k == 0 || k > train.len() {
        return Err(Error::InvalidK { k, train: train.len() });
    }
    let size = dist.size();
    if let Some(bad) = train.iter().map(|t| t.index).chain(test.iter().copied()).find(|&i| i >= size) {
        return Err(Error::IndexOutOfRange { index: bad, size });
    }

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut predictions = Vec::with_capacity(test.len());
    for &q in test {
        let row = dist.row(q);
        order.sort_by(|&a, &b| {
            row[train[a].index].total_cmp(&row[train[b].index]).then(train[a].index.cmp(&train[b].index))
        });
        // (label, count, summed distance)
        let mut votes: Vec<(&str, usize, f64)> = Vec::new();
        for &t in &order[..k] {
            let label = train[t].label.as_str();
            let d = row[train[t].index];
            match votes.iter_mut().find(|v| v.0 == label) {
                Some(v) => {
                    v.1 += 1;
                    v.2 += d;
                }
                None => votes.push((label, 1, d)),
            }
        }
        let winner = votes
            .iter()
            .min_by(|a, b| b.1.cmp(&a.1).then(a.2.total_cmp(&b.2)).then(a.0.cmp(b.0)))
            .unwrap();
        predictions.push(String::from(winner.0));
    }
    Ok(predictions)
}
