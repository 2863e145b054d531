//! Pairwise distance matrices on a bounded worker pool, with checkpoints
//! and a content-addressed cache.
//!
//! Cells are evaluated in row-major upper-triangular order and collected by
//! position, so the matrix is bit-identical for any pool size.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use morphkit_core::classify::{replicate_scores, summarize, EvaluationConfig, EvaluationSummary, LabeledIndex};
use morphkit_core::currents::{current_representation, CurrentConfig};
use morphkit_core::eigenshape::{fit_pca, select_dims};
use morphkit_core::lddmm::{lddmm_match, LddmmConfig};
use morphkit_core::outline::procrustes_align;
use morphkit_core::srvf::{srvf_distance, to_srvf, RegistrationOptions, SeedSearch, SrvfCurve};
use morphkit_core::{DistanceMatrix, ShapeSample};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distfile::{read_distances, write_distances};
use crate::error::{Context, Error, Result};
use crate::provenance::{hash_bytes, hash_shapes, Provenance};

/// A distance method together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Eigen { variance: f64 },
    Srvf { seeds: SeedSearch },
    Gc(CurrentConfig),
    Lddmm(LddmmConfig),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Eigen { .. } => "eigen",
            Method::Srvf { .. } => "srvf",
            Method::Gc(_) => "gc",
            Method::Lddmm(_) => "lddmm",
        }
    }

    pub fn params(&self) -> BTreeMap<String, String> {
        match self {
            Method::Eigen { variance } => BTreeMap::from([("variance".into(), format!("{variance}"))]),
            Method::Srvf { seeds } => {
                let s = match seeds {
                    SeedSearch::Fixed => "fixed",
                    SeedSearch::Coarse => "coarse",
                    SeedSearch::All => "all",
                };
                BTreeMap::from([("seeds".into(), s.into())])
            }
            Method::Gc(c) => c.params(),
            Method::Lddmm(c) => c.params(),
        }
    }

    /// Whether the method works on Procrustes-aligned pre-shapes.
    pub fn needs_alignment(&self) -> bool {
        matches!(self, Method::Eigen { .. } | Method::Lddmm(_))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Method::Eigen { variance } if !(*variance > 0.0 && *variance <= 1.0) => {
                Err(Error::Usage(format!("variance must be in (0, 1], got {variance}")))
            }
            Method::Gc(c) => c.validate().context(|| "gc".into()),
            Method::Lddmm(c) => c.validate().context(|| "lddmm".into()),
            _ => Ok(()),
        }
    }
}

/// Per-shape representations ready for pairwise evaluation.
#[derive(Debug)]
pub enum Prepared {
    /// Euclidean distance between vectors (eigen scores, current coefficients).
    Vectors(Vec<Vec<f64>>),
    Srvf(Vec<SrvfCurve>, RegistrationOptions),
    Lddmm { shapes: Vec<ShapeSample>, config: LddmmConfig, dump: Option<PathBuf> },
}

impl Prepared {
    pub fn len(&self) -> usize {
        match self {
            Prepared::Vectors(v) => v.len(),
            Prepared::Srvf(q, _) => q.len(),
            Prepared::Lddmm { shapes, .. } => shapes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pair(&self, i: usize, j: usize) -> Result<f64> {
        match self {
            Prepared::Vectors(v) => Ok(v[i].iter().zip(&v[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()),
            Prepared::Srvf(q, opts) => Ok(srvf_distance(&q[i], &q[j], opts)
                .context(|| format!("srvf {} vs {}", q[i].id, q[j].id))?
                .distance),
            Prepared::Lddmm { shapes, config, dump } => {
                let (a, b) = (&shapes[i], &shapes[j]);
                let ctx = || format!("lddmm {} vs {}", a.id, b.id);
                let ab = lddmm_match(a, b, config).context(ctx)?;
                let ba = lddmm_match(b, a, config).context(ctx)?;
                if let Some(dir) = dump {
                    crate::export::write_match(&ab, &dir.join(crate::shapes::sanitize(&format!("{}__{}", a.id, b.id)) + ".json"))?;
                    crate::export::write_match(&ba, &dir.join(crate::shapes::sanitize(&format!("{}__{}", b.id, a.id)) + ".json"))?;
                }
                Ok(0.5 * (ab.distance + ba.distance))
            }
        }
    }
}

/// Builds representations; methods that need it align first.
pub fn prepare(shapes: &[ShapeSample], method: &Method) -> Result<Prepared> {
    method.validate()?;
    if shapes.len() < 2 {
        return Err(Error::core("distmat", morphkit_core::Error::InsufficientSamples { needed: 2, got: shapes.len() }));
    }
    Ok(match method {
        Method::Eigen { variance } => {
            let pre = procrustes_align(shapes).context(|| "procrustes".into())?;
            let model = fit_pca(&pre).context(|| "pca".into())?;
            let config = select_dims(&model, *variance).context(|| "pca".into())?;
            let scores =
                pre.iter().map(|p| model.project(&p.to_vector(), config.dims)).collect::<morphkit_core::Result<_>>()?;
            Prepared::Vectors(scores)
        }
        Method::Srvf { seeds } => {
            let q = shapes.iter().map(|s| to_srvf(s).context(|| format!("srvf {}", s.id))).collect::<Result<_>>()?;
            Prepared::Srvf(q, RegistrationOptions { seeds: *seeds, ..RegistrationOptions::default() })
        }
        Method::Gc(config) => Prepared::Vectors(
            shapes
                .iter()
                .map(|s| current_representation(s, config).map(|r| r.coefficients).context(|| format!("gc {}", s.id)))
                .collect::<Result<_>>()?,
        ),
        Method::Lddmm(config) => {
            let pre = procrustes_align(shapes).context(|| "procrustes".into())?;
            Prepared::Lddmm { shapes: pre.iter().map(|p| p.to_sample()).collect(), config: *config, dump: None }
        }
    })
}

#[derive(Debug, Clone, Default)]
pub struct DistmatOptions {
    /// Worker threads; 0 means one per logical CPU.
    pub threads: usize,
    /// Progress file for resuming an interrupted run.
    pub checkpoint: Option<PathBuf>,
    /// Cells per checkpoint flush; 0 means 1000.
    pub checkpoint_every: usize,
    /// Directory of finished matrices keyed by input hash and parameters.
    pub cache_dir: Option<PathBuf>,
    /// LDDMM only: write each match as JSON here.
    pub dump_matches: Option<PathBuf>,
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Usage(e.to_string()))
}

fn upper_cells(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Reads completed cells from a checkpoint whose first line matches `key`.
/// A torn final line is ignored.
fn load_checkpoint(path: &Path, key: &str) -> Vec<f64> {
    let Ok(text) = fs::read_to_string(path) else { return Vec::new() };
    let mut lines = text.split_inclusive('\n');
    if lines.next().map(|l| l.trim_end()) != Some(key) {
        return Vec::new();
    }
    lines
        .take_while(|l| l.ends_with('\n'))
        .map_while(|l| u64::from_str_radix(l.trim_end(), 16).ok().map(f64::from_bits))
        .collect()
}

/// Evaluates every upper-triangular cell, strictly above the diagonal, in
/// row-major order.
pub fn compute_upper(prepared: &Prepared, options: &DistmatOptions, key: &str) -> Result<Vec<f64>> {
    let cells = upper_cells(prepared.len());
    let every = if options.checkpoint_every == 0 { 1000 } else { options.checkpoint_every };
    let mut values = match &options.checkpoint {
        Some(p) => load_checkpoint(p, key),
        None => Vec::new(),
    };
    values.truncate(cells.len());
    let mut sink = match &options.checkpoint {
        Some(p) => {
            // Rewrite what was recovered so torn tails disappear.
            let mut body = format!("{key}\n");
            for v in &values {
                body.push_str(&format!("{:016x}\n", v.to_bits()));
            }
            fs::write(p, body).map_err(|e| Error::io(p, e))?;
            Some((p.clone(), OpenOptions::new().append(true).open(p).map_err(|e| Error::io(p, e))?))
        }
        None => None,
    };
    let pool = thread_pool(options.threads)?;
    for chunk in cells[values.len()..].chunks(every) {
        let done: Vec<f64> =
            pool.install(|| chunk.par_iter().map(|&(i, j)| prepared.pair(i, j)).collect::<Result<Vec<_>>>())?;
        if let Some((path, file)) = sink.as_mut() {
            let text: String = done.iter().map(|v| format!("{:016x}\n", v.to_bits())).collect();
            file.write_all(text.as_bytes()).and_then(|_| file.flush()).map_err(|e| Error::io(&*path, e))?;
        }
        values.extend(done);
    }
    if let Some((path, _)) = sink {
        let _ = fs::remove_file(path);
    }
    Ok(values)
}

/// Cache key and provenance inputs hash for a shape set and method.
pub fn cache_key(shapes: &[ShapeSample], method: &Method) -> String {
    let params = serde_json::to_vec(&method.params()).unwrap_or_default();
    hash_bytes(&[hash_shapes(shapes).as_bytes(), method.name().as_bytes(), &params])
}

/// Full distance matrix for `shapes`, reusing a cached result when present.
pub fn distance_matrix(
    shapes: &[ShapeSample],
    method: &Method,
    options: &DistmatOptions,
) -> Result<(DistanceMatrix, Provenance)> {
    let key = cache_key(shapes, method);
    let provenance = Provenance::new("distmat", hash_shapes(shapes)).with_method(method.name(), method.params());
    let cached = options.cache_dir.as_ref().map(|d| d.join(format!("{key}.csv")));
    if let Some(path) = cached.as_ref().filter(|p| p.exists()) {
        let (m, p) = read_distances(path)?;
        if p.as_ref().map(|p| &p.inputs) == Some(&provenance.inputs) {
            return Ok((m, provenance));
        }
    }
    let mut prepared = prepare(shapes, method)?;
    if let (Prepared::Lddmm { dump, .. }, Some(dir)) = (&mut prepared, &options.dump_matches) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        *dump = Some(dir.clone());
    }
    let upper = compute_upper(&prepared, options, &key)?;
    let ids = shapes.iter().map(|s| s.id.clone()).collect();
    let matrix = DistanceMatrix::from_upper(ids, &upper, method.name(), method.params()).context(|| "distmat".into())?;
    if let Some(path) = cached {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        write_distances(&matrix, &provenance, &path)?;
    }
    Ok((matrix, provenance))
}

/// Matrix rows paired with labels from `table`.
pub fn labeled_indices(matrix: &DistanceMatrix, table: &BTreeMap<String, String>) -> Result<Vec<LabeledIndex>> {
    matrix
        .ids()
        .iter()
        .enumerate()
        .map(|(i, id)| {
            table
                .get(id)
                .map(|l| LabeledIndex::new(i, l.clone()))
                .ok_or_else(|| Error::core("labels", morphkit_core::Error::UnknownLabel(id.clone())))
        })
        .collect()
}

/// Replicates run on the pool; the summary does not depend on its size.
pub fn evaluate_parallel(
    matrix: &DistanceMatrix,
    labels: &[LabeledIndex],
    config: &EvaluationConfig,
    threads: usize,
) -> Result<EvaluationSummary> {
    let pool = thread_pool(threads)?;
    let scores = pool.install(|| {
        (0..config.replicates)
            .into_par_iter()
            .map(|r| replicate_scores(matrix, labels, config, r))
            .collect::<morphkit_core::Result<Vec<_>>>()
    });
    let scores = scores.context(|| "classify".into())?;
    summarize(matrix, labels, config, scores).context(|| "classify".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use morphkit_core::Point;

    fn blobs(n: usize) -> Vec<ShapeSample> {
        (0..n)
            .map(|k| {
                let pts = (0..48)
                    .map(|i| {
                        let t = std::f64::consts::TAU * i as f64 / 48.0;
                        let r = 1.0 + 0.05 * k as f64 * (3.0 * t).cos() + 0.02 * (k as f64 * t).sin();
                        Point::new(r * t.cos(), r * t.sin())
                    })
                    .collect();
                ShapeSample::new(format!("s{k}"), Some(format!("c{}", k % 2)), pts).unwrap()
            })
            .collect()
    }

    #[test]
    fn pool_size_does_not_change_bits() {
        let shapes = blobs(7);
        let method = Method::Gc(CurrentConfig::default());
        let one = distance_matrix(&shapes, &method, &DistmatOptions { threads: 1, ..Default::default() }).unwrap().0;
        let many = distance_matrix(&shapes, &method, &DistmatOptions { threads: 5, checkpoint_every: 2, ..Default::default() })
            .unwrap()
            .0;
        assert_eq!(one, many);
    }

    #[test]
    fn resume_from_checkpoint() {
        let shapes = blobs(6);
        let method = Method::Eigen { variance: 0.99 };
        let prepared = prepare(&shapes, &method).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let ck = dir.path().join("ck");
        let key = cache_key(&shapes, &method);
        let full = compute_upper(&prepared, &DistmatOptions::default(), &key).unwrap();
        // Simulate an interrupted run: 4 finished cells and half a line.
        let mut body = format!("{key}\n");
        for v in &full[..4] {
            body.push_str(&format!("{:016x}\n", v.to_bits()));
        }
        body.push_str("3ff0");
        fs::write(&ck, body).unwrap();
        assert_eq!(load_checkpoint(&ck, &key).len(), 4);
        let opts = DistmatOptions { checkpoint: Some(ck.clone()), checkpoint_every: 3, ..Default::default() };
        assert_eq!(compute_upper(&prepared, &opts, &key).unwrap(), full);
        assert!(!ck.exists());
        // A stale key is ignored.
        fs::write(&ck, "other\n0000000000000000\n").unwrap();
        assert!(load_checkpoint(&ck, &key).is_empty());
    }

    #[test]
    fn cache_hit_returns_same_matrix() {
        let shapes = blobs(5);
        let method = Method::Srvf { seeds: SeedSearch::Coarse };
        let dir = tempfile::tempdir().unwrap();
        let opts = DistmatOptions { cache_dir: Some(dir.path().to_path_buf()), ..Default::default() };
        let (a, _) = distance_matrix(&shapes, &method, &opts).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        let (b, _) = distance_matrix(&shapes, &method, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_evaluation_matches_sequential() {
        let shapes = blobs(12);
        let (m, _) = distance_matrix(&shapes, &Method::Eigen { variance: 0.95 }, &DistmatOptions::default()).unwrap();
        let table: BTreeMap<String, String> =
            shapes.iter().map(|s| (s.id.clone(), s.label.clone().unwrap())).collect();
        let labels = labeled_indices(&m, &table).unwrap();
        let config = EvaluationConfig { k_min: 1, k_max: 3, replicates: 9, ..Default::default() };
        let seq = morphkit_core::classify::evaluate(&m, &labels, &config).unwrap();
        assert_eq!(evaluate_parallel(&m, &labels, &config, 4).unwrap(), seq);
    }
}
