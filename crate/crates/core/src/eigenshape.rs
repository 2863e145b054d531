//! Eigenshapes: PCA of aligned semi-landmark coordinates and Euclidean
//! distances between the leading PC scores.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::classify::DistanceMatrix;
use crate::outline::PreShape;
use crate::{Error, Result};

/// Principal components of a sample of coordinate vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenModel {
    pub mean: Vec<f64>,
    /// Non-increasing component variances (denominator `n_samples - 1`).
    pub eigenvalues: Vec<f64>,
    /// One orthonormal row per eigenvalue.
    pub eigenvectors: Vec<Vec<f64>>,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    pub variance_fraction: f64,
    pub dims: usize,
}

/// PCA through the SVD of the centered data matrix.
///
/// Keeps `min(dim, n_samples - 1)` components. Each eigenvector is signed so
/// that its largest-magnitude entry is positive.
pub fn fit_pca_vectors(vectors: &[Vec<f64>]) -> Result<EigenModel> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let dim = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    let mut mean = alloc::vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = DMatrix::from_fn(n, dim, |i, j| vectors[i][j] - mean[j]);
    let svd = centered.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let keep = dim.min(n - 1);
    let mut eigenvalues = Vec::with_capacity(keep);
    let mut eigenvectors = Vec::with_capacity(keep);
    for &c in order.iter().take(keep) {
        let s = svd.singular_values[c];
        eigenvalues.push(s * s / (n - 1) as f64);
        let mut row: Vec<f64> = v_t.row(c).iter().copied().collect();
        let pivot = row.iter().copied().fold(0.0, |best: f64, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            for x in &mut row {
                *x = -*x;
            }
        }
        eigenvectors.push(row);
    }
    Ok(EigenModel { mean, eigenvalues, eigenvectors, n_samples: n })
}

/// PCA over interleaved `(x1, y1, …, xN, yN)` pre-shape coordinates.
pub fn fit_pca(preshapes: &[PreShape]) -> Result<EigenModel> {
    if let Some(first) = preshapes.first() {
        if let Some(bad) = preshapes.iter().find(|p| p.n() != first.n()) {
            return Err(Error::MismatchedSizes(first.n(), bad.n()));
        }
    }
    let vectors: Vec<Vec<f64>> = preshapes.iter().map(PreShape::to_vector).collect();
    fit_pca_vectors(&vectors)
}

impl EigenModel {
    pub fn components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Scores of `vector` on the first `dims` components.
    pub fn project(&self, vector: &[f64], dims: usize) -> Result<Vec<f64>> {
        if vector.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: vector.len() });
        }
        if dims > self.components() {
            return Err(Error::DimensionMismatch { expected: self.components(), got: dims });
        }
        Ok(self.eigenvectors[..dims]
            .iter()
            .map(|e| e.iter().zip(vector).zip(&self.mean).map(|((e, x), m)| e * (x - m)).sum())
            .collect())
    }

    /// Maps scores back to coordinates.
    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (s, e) in scores.iter().zip(&self.eigenvectors) {
            for (o, x) in out.iter_mut().zip(e) {
                *o += s * x;
            }
        }
        out
    }
}

/// Smallest number of leading components whose variances add up to at least
/// `variance_fraction` of the total.
pub fn select_dims(model: &EigenModel, variance_fraction: f64) -> Result<EigenConfig> {
    if !(variance_fraction > 0.0 && variance_fraction <= 1.0) {
        return Err(Error::ConfigOutOfRange("variance fraction must lie in (0, 1]"));
    }
    let total = model.total_variance();
    let all = EigenConfig { variance_fraction, dims: model.components() };
    if variance_fraction >= 1.0 || total <= 0.0 {
        return Ok(all);
    }
    let mut cumulative = 0.0;
    for (d, ev) in model.eigenvalues.iter().enumerate() {
        cumulative += ev;
        if cumulative / total >= variance_fraction - 1e-12 {
            return Ok(EigenConfig { variance_fraction, dims: d + 1 });
        }
    }
    Ok(all)
}

/// Euclidean distances between score vectors on the first `config.dims`
/// components.
pub fn score_distances(
    model: &EigenModel,
    config: &EigenConfig,
    ids: Vec<String>,
    vectors: &[Vec<f64>],
    method: &str,
) -> Result<DistanceMatrix> {
    let scores = vectors.iter().map(|v| model.project(v, config.dims)).collect::<Result<Vec<_>>>()?;
    let mut params = BTreeMap::new();
    params.insert(String::from("variance"), format!("{}", config.variance_fraction));
    params.insert(String::from("dims"), format!("{}", config.dims));
    DistanceMatrix::from_fn(ids, method, params, |i, j| {
        Ok(scores[i].iter().zip(&scores[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    })
}

pub fn eigen_distances(model: &EigenModel, config: &EigenConfig, preshapes: &[PreShape]) -> Result<DistanceMatrix> {
    let ids = preshapes.iter().map(|p| p.id.clone()).collect();
    let vectors: Vec<Vec<f64>> = preshapes.iter().map(PreShape::to_vector).collect();
    score_distances(model, config, ids, &vectors, "eigen")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Small deterministic generator for test data.
    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    }

    fn random_preshapes(count: usize, n: usize, seed: u64) -> Vec<PreShape> {
        let mut s = seed;
        (0..count)
            .map(|k| {
                let pts: Vec<Point> = (0..n)
                    .map(|i| {
                        let t = core::f64::consts::TAU * i as f64 / n as f64;
                        let r = 1.0 + 0.2 * lcg(&mut s);
                        Point::new(r * t.cos(), r * t.sin())
                    })
                    .collect();
                let pts = crate::outline::normalize_configuration(&pts).unwrap();
                PreShape { id: format!("r{k}"), label: None, points: pts }
            })
            .collect()
    }

    fn euclid(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    #[test]
    fn collinear_family_has_rank_one() {
        let base: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let dir: Vec<f64> = (0..12).map(|i| (i as f64 * 1.3).cos()).collect();
        let vectors: Vec<Vec<f64>> =
            (0..3).map(|k| base.iter().zip(&dir).map(|(b, d)| b + 0.1 * k as f64 * d).collect()).collect();
        let model = fit_pca_vectors(&vectors).unwrap();
        assert_eq!(model.components(), 2);
        assert!(model.eigenvalues[0] > 1e-3);
        assert!(model.eigenvalues[1].abs() < 1e-10);
    }

    #[test]
    fn eigenvalues_sum_to_trace_and_basis_is_orthonormal() {
        let shapes = random_preshapes(20, 15, 3);
        let model = fit_pca(&shapes).unwrap();
        let vectors: Vec<Vec<f64>> = shapes.iter().map(PreShape::to_vector).collect();
        let trace: f64 = (0..model.dim())
            .map(|j| vectors.iter().map(|v| (v[j] - model.mean[j]).powi(2)).sum::<f64>() / 19.0)
            .sum();
        assert!((model.total_variance() - trace).abs() <= 1e-8 * trace);
        assert!(model.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        for (a, ea) in model.eigenvectors.iter().enumerate() {
            for (b, eb) in model.eigenvectors.iter().enumerate() {
                let dot: f64 = ea.iter().zip(eb).map(|(x, y)| x * y).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn full_reconstruction() {
        let shapes = random_preshapes(20, 15, 9);
        let model = fit_pca(&shapes).unwrap();
        for s in &shapes {
            let v = s.to_vector();
            let back = model.reconstruct(&model.project(&v, model.components()).unwrap());
            assert!(euclid(&v, &back) < 1e-8);
        }
        let mean_scores = model.project(&model.mean.clone(), model.components()).unwrap();
        assert!(mean_scores.iter().all(|s| s.abs() < 1e-10));
    }

    #[test]
    fn select_dims_cases() {
        let model = EigenModel {
            mean: vec![0.0; 4],
            eigenvalues: vec![4.0, 3.0, 2.0, 1.0],
            eigenvectors: vec![vec![0.0; 4]; 4],
            n_samples: 5,
        };
        assert_eq!(select_dims(&model, 0.69).unwrap().dims, 2);
        assert_eq!(select_dims(&model, 0.7).unwrap().dims, 2);
        assert_eq!(select_dims(&model, 0.71).unwrap().dims, 3);
        assert_eq!(select_dims(&model, 1.0).unwrap().dims, 4);
        assert!(select_dims(&model, 0.0).is_err());
    }

    #[test]
    fn all_dims_reproduce_raw_distances() {
        let shapes = random_preshapes(8, 12, 21);
        let model = fit_pca(&shapes).unwrap();
        let config = select_dims(&model, 1.0).unwrap();
        let d = eigen_distances(&model, &config, &shapes).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let raw = euclid(&shapes[i].to_vector(), &shapes[j].to_vector());
                assert!((d.get(i, j) - raw).abs() <= 1e-10 * raw.max(1.0));
            }
        }
    }

    #[test]
    fn two_dims_match_hand_projection() {
        let shapes = random_preshapes(5, 10, 5);
        let model = fit_pca(&shapes).unwrap();
        let config = EigenConfig { variance_fraction: 0.5, dims: 2 };
        let d = eigen_distances(&model, &config, &shapes).unwrap();
        let scores: Vec<[f64; 2]> = shapes
            .iter()
            .map(|s| {
                let v = s.to_vector();
                let mut out = [0.0; 2];
                for (c, o) in out.iter_mut().enumerate() {
                    for j in 0..v.len() {
                        *o += model.eigenvectors[c][j] * (v[j] - model.mean[j]);
                    }
                }
                out
            })
            .collect();
        for i in 0..5 {
            for j in 0..5 {
                let oracle = ((scores[i][0] - scores[j][0]).powi(2) + (scores[i][1] - scores[j][1]).powi(2)).sqrt();
                assert!((d.get(i, j) - oracle).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn distance_grows_with_dims() {
        let shapes = random_preshapes(10, 10, 77);
        let model = fit_pca(&shapes).unwrap();
        let mats: Vec<DistanceMatrix> = (1..=model.components())
            .map(|d| eigen_distances(&model, &EigenConfig { variance_fraction: 1.0, dims: d }, &shapes).unwrap())
            .collect();
        for w in mats.windows(2) {
            for i in 0..10 {
                for j in 0..10 {
                    assert!(w[1].get(i, j) >= w[0].get(i, j) - 1e-14);
                }
            }
        }
    }

    #[test]
    fn needs_two_samples() {
        let shapes = random_preshapes(1, 8, 1);
        assert_eq!(fit_pca(&shapes), Err(Error::InsufficientSamples { needed: 2, got: 1 }));
    }
}
