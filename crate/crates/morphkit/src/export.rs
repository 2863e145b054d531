//! Model, embedding and representation files.

use std::fs;
use std::path::{Path, PathBuf};

use morphkit_core::currents::CurrentRep;
use morphkit_core::eigenshape::EigenModel;
use morphkit_core::lddmm::MatchResult;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::provenance::Provenance;

fn write_json_file(value: &impl Serialize, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_json_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub provenance: Provenance,
    pub model: EigenModel,
}

pub fn write_model(model: &EigenModel, provenance: &Provenance, path: &Path) -> Result<()> {
    write_json_file(&ModelFile { provenance: provenance.clone(), model: model.clone() }, path)
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    read_json_file(path)
}

/// A labeled row of principal component scores.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRow {
    pub id: String,
    pub label: Option<String>,
    pub scores: Vec<f64>,
}

/// Projects `vectors` on the first `dims` components.
pub fn embedding(
    model: &EigenModel,
    items: &[(String, Option<String>, Vec<f64>)],
    dims: usize,
) -> Result<Vec<EmbeddingRow>> {
    if dims == 0 || dims > model.components() {
        return Err(Error::Usage(format!("{dims} dimensions requested, model has {}", model.components())));
    }
    items
        .iter()
        .map(|(id, label, v)| {
            Ok(EmbeddingRow { id: id.clone(), label: label.clone(), scores: model.project(v, dims)? })
        })
        .collect()
}

/// `id,label,PC1..PCd` with a leading provenance comment.
pub fn write_embedding(rows: &[EmbeddingRow], provenance: &Provenance, path: &Path) -> Result<()> {
    let dims = rows.first().map_or(0, |r| r.scores.len());
    let mut out = format!("# provenance {}\n", serde_json::to_string(provenance).unwrap_or_default()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let err = |e: csv::Error| Error::format(path, e);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend((1..=dims).map(|d| format!("PC{d}")));
        w.write_record(&header).map_err(err)?;
        for r in rows {
            let mut rec = vec![r.id.clone(), r.label.clone().unwrap_or_default()];
            rec.extend(r.scores.iter().map(|s| format!("{s}")));
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CurrentSidecar {
    provenance: Provenance,
    id: String,
    config: morphkit_core::currents::CurrentConfig,
    rows: usize,
    cols: usize,
    /// Row blocks, top to bottom.
    layout: String,
}

/// Writes `<stem>.csv` (the coefficient matrix) and `<stem>.json` (config).
pub fn write_current(rep: &CurrentRep, provenance: &Provenance, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    let cols = rep.cols();
    let mut out = String::new();
    for row in rep.coefficients.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(&csv_path, out).map_err(|e| Error::io(&csv_path, e))?;
    let sidecar = CurrentSidecar {
        provenance: provenance.clone(),
        id: rep.id.clone(),
        config: rep.config,
        rows: rep.rows(),
        cols,
        layout: "x component rows then y component rows; row = basis y index, column = basis x index".into(),
    };
    write_json_file(&sidecar, &json_path)?;
    Ok((csv_path, json_path))
}

pub fn read_current(stem: &Path) -> Result<CurrentRep> {
    let json_path = stem.with_extension("json");
    let csv_path = stem.with_extension("csv");
    let sidecar: CurrentSidecar = read_json_file(&json_path)?;
    let text = fs::read_to_string(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut coefficients = Vec::with_capacity(sidecar.rows * sidecar.cols);
    for (r, line) in text.lines().enumerate() {
        for v in line.split(',') {
            coefficients.push(v.trim().parse::<f64>().map_err(|_| Error::format(&csv_path, format!("row {}", r + 1)))?);
        }
    }
    if coefficients.len() != sidecar.rows * sidecar.cols || sidecar.cols != sidecar.config.side() {
        return Err(Error::format(&csv_path, "matrix shape does not match the sidecar"));
    }
    Ok(CurrentRep { id: sidecar.id, config: sidecar.config, coefficients })
}

pub fn write_match(result: &MatchResult, path: &Path) -> Result<()> {
    write_json_file(result, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use morphkit_core::currents::{current_representation, CurrentConfig};
    use morphkit_core::eigenshape::fit_pca_vectors;
    use morphkit_core::{Point, ShapeSample};

    #[test]
    fn current_files_round_trip() {
        let pts = (0..40)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 40.0;
                Point::new(t.cos(), 0.5 * t.sin())
            })
            .collect();
        let s = ShapeSample::new("e", None, pts).unwrap();
        let rep = current_representation(&s, &CurrentConfig { s: 3, m: 16, sigma: 2.0 }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (csv_path, _) = write_current(&rep, &Provenance::new("gc", "x".into()), &dir.path().join("e")).unwrap();
        assert_eq!(fs::read_to_string(csv_path).unwrap().lines().count(), 2 * 19);
        assert_eq!(read_current(&dir.path().join("e")).unwrap(), rep);
    }

    #[test]
    fn rank_one_embedding_recovers_parameter() {
        let params: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let dir = [0.6, -0.8, 0.0];
        let vectors: Vec<Vec<f64>> = params.iter().map(|t| dir.iter().map(|d| 1.0 + t * d).collect()).collect();
        let model = fit_pca_vectors(&vectors).unwrap();
        let items: Vec<_> = vectors.iter().enumerate().map(|(i, v)| (format!("s{i}"), None, v.clone())).collect();
        let rows = embedding(&model, &items, 1).unwrap();
        assert_eq!(rows.len(), 15);
        let xs: Vec<f64> = rows.iter().map(|r| r.scores[0]).collect();
        let (mx, mt) = (xs.iter().sum::<f64>() / 15.0, params.iter().sum::<f64>() / 15.0);
        let cov: f64 = xs.iter().zip(&params).map(|(x, t)| (x - mx) * (t - mt)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let vt: f64 = params.iter().map(|t| (t - mt) * (t - mt)).sum();
        assert!((cov / (vx * vt).sqrt()).abs() > 0.999);
        assert!(embedding(&model, &items, model.components() + 1).is_err());
    }

    #[test]
    fn constant_data_embeds_at_zero() {
        let vectors = vec![vec![1.0, 2.0, 3.0]; 5];
        let model = fit_pca_vectors(&vectors).unwrap();
        let items: Vec<_> = vectors.iter().map(|v| ("a".to_string(), None, v.clone())).collect();
        for r in embedding(&model, &items, model.components()).unwrap() {
            assert!(r.scores.iter().all(|s| *s == 0.0));
        }
    }
}
