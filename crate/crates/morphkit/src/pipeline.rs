//! End-to-end runs and the figure exports built on them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use morphkit_core::classify::EvaluationSummary;
use morphkit_core::geometry::{self, Point};
use morphkit_core::outline::{extract_contour, procrustes_align, resample, symmetrize_vertical, Outline};
use morphkit_core::srvf::{geodesic_path, karcher_mean, GeodesicPath, KarcherOptions, RegistrationOptions};
use morphkit_core::{DistanceMatrix, ShapeSample};
use serde::{Deserialize, Serialize};

use crate::compute::{distance_matrix, evaluate_parallel, labeled_indices, DistmatOptions, Method};
use crate::config::{DatasetManifest, Settings, SweepSpec};
use crate::distfile::write_distances;
use crate::error::{Context, Error, Result};
use crate::image::{is_image_file, load_raster};
use crate::provenance::{hash_shapes, Provenance};
use crate::shapes::{self, file_stem, read_labels, read_shape, write_labels, write_shapes};
use crate::svg;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestOptions {
    pub threshold: f64,
    pub symmetrize: bool,
    pub n_points: Option<usize>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { threshold: 0.5, symmetrize: false, n_points: None }
    }
}

/// Turns an image or an outline file into a shape: contour extraction for
/// images, then optional symmetrization and resampling.
pub fn ingest_file(path: &Path, label: Option<String>, opts: &IngestOptions) -> Result<ShapeSample> {
    let here = || path.display().to_string();
    let mut outline = if is_image_file(path) {
        let raster = load_raster(path)?;
        let mut o = extract_contour(&raster, opts.threshold).context(here)?;
        o.id = file_stem(path);
        o
    } else {
        let s = read_shape(path)?;
        let mut o = Outline::new(s.id.clone(), s.points).context(here)?;
        o.label = s.label;
        o
    };
    if label.is_some() {
        outline.label = label;
    }
    if opts.symmetrize {
        let (id, label) = (outline.id.clone(), outline.label.clone());
        outline = symmetrize_vertical(&outline).context(here)?;
        outline.id = id;
        outline.label = label;
    }
    match opts.n_points {
        Some(n) => resample(&outline, n).context(here),
        None => ShapeSample::new(outline.id.clone(), outline.label.clone(), outline.points().to_vec()).context(here),
    }
}

/// Expands directories into their image and shape files, sorted.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && (is_image_file(f) || shapes::is_shape_file(f)))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn ingest_options(manifest: &DatasetManifest, settings: &Settings) -> Result<IngestOptions> {
    Ok(IngestOptions {
        threshold: settings.threshold.unwrap_or(manifest.threshold),
        symmetrize: settings.symmetrize.unwrap_or(manifest.symmetrize),
        n_points: Some(match settings.n_points {
            Some(n) => n,
            None => manifest.n_points()?,
        }),
    })
}

/// Loads, cleans and resamples every shape listed in a manifest.
pub fn ingest_manifest(manifest: &DatasetManifest, settings: &Settings) -> Result<Vec<ShapeSample>> {
    let opts = ingest_options(manifest, settings)?;
    let mut out = Vec::new();
    for e in &manifest.shapes {
        out.push(ingest_file(&manifest.resolve(&e.path), Some(e.label.clone()), &opts)?);
    }
    if let Some(dir) = &manifest.shapes_dir {
        let dir = manifest.resolve(dir);
        let table_path = manifest.resolve(manifest.labels.as_ref().expect("validated"));
        let table = read_labels(&table_path)?;
        for p in expand_inputs(&[dir])? {
            let mut s = ingest_file(&p, None, &opts)?;
            if let Some(l) = table.get(&s.id) {
                s.label = Some(l.clone());
            }
            out.push(s);
        }
        shapes::apply_labels(&mut out, Some(&table), &table_path)?;
    }
    let mut seen = BTreeMap::new();
    for s in &out {
        if seen.insert(s.id.as_str(), ()).is_some() {
            return Err(Error::Usage(format!("manifest {}: duplicate shape id {:?}", manifest.name, s.id)));
        }
    }
    Ok(out)
}

/// The classification report file: provenance plus the evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub summary: EvaluationSummary,
}

pub fn render_report(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

pub fn label_table(shapes: &[ShapeSample]) -> BTreeMap<String, String> {
    shapes.iter().filter_map(|s| Some((s.id.clone(), s.label.clone()?))).collect()
}

/// Scores a distance matrix and wraps the result with provenance.
pub fn classify(
    matrix: &DistanceMatrix,
    table: &BTreeMap<String, String>,
    settings: &Settings,
    inputs: String,
) -> Result<Report> {
    let config = settings.evaluation()?;
    let labels = labeled_indices(matrix, table)?;
    let summary = evaluate_parallel(matrix, &labels, &config, settings.threads())?;
    let provenance = Provenance::new("classify", inputs)
        .with_method(&matrix.method, matrix.params.clone())
        .with_seed(config.seed)
        .with_config(&settings.for_provenance());
    Ok(Report { provenance, summary })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub shapes_dir: PathBuf,
    pub distances: PathBuf,
    pub report: PathBuf,
    pub summary: EvaluationSummary,
}

/// ingest → resample → (align) → distmat → evaluate, writing every stage
/// under `out`.
pub fn run_pipeline(manifest: &DatasetManifest, method: &Method, settings: &Settings, out: &Path) -> Result<RunOutput> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let shapes = ingest_manifest(manifest, settings)?;
    let shapes_dir = out.join("shapes");
    write_shapes(&shapes, &shapes_dir)?;
    let table = label_table(&shapes);
    let pairs: Vec<(String, String)> = table.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
    write_labels(&pairs, &out.join("labels.csv"))?;
    if method.needs_alignment() {
        let aligned = procrustes_align(&shapes).context(|| "align".into())?;
        write_shapes(&aligned.iter().map(|p| p.to_sample()).collect::<Vec<_>>(), &out.join("aligned"))?;
    }
    let options = DistmatOptions {
        threads: settings.threads(),
        checkpoint: Some(out.join("dist.checkpoint")),
        cache_dir: settings.cache_dir.clone(),
        ..Default::default()
    };
    let (matrix, provenance) = distance_matrix(&shapes, method, &options)?;
    let provenance = provenance.with_config(&settings.for_provenance());
    let distances = out.join("dist.csv");
    write_distances(&matrix, &provenance, &distances)?;
    let report = classify(&matrix, &table, settings, hash_shapes(&shapes))?;
    let report_path = out.join("report.json");
    fs::write(&report_path, render_report(&report)).map_err(|e| Error::io(&report_path, e))?;
    Ok(RunOutput { shapes_dir, distances, report: report_path, summary: report.summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: String,
    pub params: BTreeMap<String, String>,
    pub best_k: Option<usize>,
    pub mean_f1: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub error: Option<String>,
}

/// Evaluates every grid point. Failed cells are kept with their error and
/// sorted last; the rest by mean F1, best first.
pub fn sweep(shapes: &[ShapeSample], spec: &SweepSpec, settings: &Settings) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let table = label_table(shapes);
    let options = DistmatOptions { threads: settings.threads(), cache_dir: settings.cache_dir.clone(), ..Default::default() };
    let mut rows: Vec<SweepRow> = spec
        .grid
        .iter()
        .map(|method| {
            let result = distance_matrix(shapes, method, &options)
                .and_then(|(m, _)| classify(&m, &table, settings, hash_shapes(shapes)));
            let base = SweepRow {
                method: method.name().into(),
                params: method.params(),
                best_k: None,
                mean_f1: None,
                ci_low: None,
                ci_high: None,
                error: None,
            };
            match result {
                Ok(r) => {
                    let best = r.summary.per_k.iter().find(|k| k.k == r.summary.best_k).expect("best k present");
                    SweepRow {
                        best_k: Some(best.k),
                        mean_f1: Some(best.mean_f1),
                        ci_low: Some(best.ci_low),
                        ci_high: Some(best.ci_high),
                        ..base
                    }
                }
                Err(e) => SweepRow { error: Some(e.to_string()), ..base },
            }
        })
        .collect();
    rows.sort_by(|a, b| match (a.mean_f1, b.mean_f1) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    Ok(rows)
}

pub fn write_sweep(rows: &[SweepRow], provenance: &Provenance, path: &Path) -> Result<()> {
    let mut out = format!("# provenance {}\n", serde_json::to_string(provenance).unwrap_or_default()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let err = |e: csv::Error| Error::format(path, e);
        w.write_record(["rank", "method", "params", "best_k", "mean_f1", "ci_low", "ci_high", "error"]).map_err(err)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for (i, r) in rows.iter().enumerate() {
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            w.write_record([
                (i + 1).to_string(),
                r.method.clone(),
                params.join(";"),
                r.best_k.map(|k| k.to_string()).unwrap_or_default(),
                opt(r.mean_f1),
                opt(r.ci_low),
                opt(r.ci_high),
                r.error.clone().unwrap_or_default(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanKind {
    Linear,
    Karcher,
}

/// Centered, unit centroid size.
fn unit_size(points: &[Point]) -> Vec<Point> {
    let c = geometry::centroid(points);
    let s = geometry::centroid_size(points);
    points.iter().map(|p| (*p - c) * (1.0 / s)).collect()
}

/// Coordinate-wise mean of the aligned pre-shapes, not rescaled.
pub fn linear_mean(samples: &[ShapeSample]) -> Result<Vec<Point>> {
    let pre = procrustes_align(samples).context(|| "linear mean".into())?;
    let n = pre[0].n();
    let mut mean = vec![Point::ZERO; n];
    for p in &pre {
        for (m, q) in mean.iter_mut().zip(&p.points) {
            *m += *q * (1.0 / pre.len() as f64);
        }
    }
    Ok(mean)
}

/// Karcher mean on the SRVF sphere, centered at unit centroid size so it
/// can be compared with linear means.
pub fn karcher_mean_shape(samples: &[ShapeSample]) -> Result<Vec<Point>> {
    let m = karcher_mean(samples, &KarcherOptions::default()).context(|| "karcher mean".into())?;
    Ok(unit_size(&m.shape.points))
}

/// Per-class means, in label order.
pub fn class_means(shapes: &[ShapeSample], kind: MeanKind) -> Result<Vec<(String, Vec<Point>)>> {
    let mut classes: BTreeMap<String, Vec<ShapeSample>> = BTreeMap::new();
    for s in shapes {
        let label = s.label.clone().ok_or_else(|| Error::Usage(format!("shape {:?} has no label", s.id)))?;
        classes.entry(label).or_default().push(s.clone());
    }
    if classes.is_empty() {
        return Err(Error::Usage("no shapes".into()));
    }
    classes
        .into_iter()
        .map(|(label, members)| {
            let mean = match kind {
                MeanKind::Linear => linear_mean(&members)?,
                MeanKind::Karcher => karcher_mean_shape(&members)?,
            };
            Ok((label, mean))
        })
        .collect()
}

pub fn export_means(shapes: &[ShapeSample], kind: MeanKind) -> Result<(Vec<(String, Vec<Point>)>, String)> {
    let means = class_means(shapes, kind)?;
    let title = match kind {
        MeanKind::Linear => "linear means",
        MeanKind::Karcher => "Karcher means",
    };
    let svg = svg::labeled_grid(title, &means);
    Ok((means, svg))
}

/// Geodesic between two shapes; the second is resampled to the first's
/// point count when they differ.
pub fn morph(a: &ShapeSample, b: &ShapeSample, steps: usize) -> Result<(GeodesicPath, String)> {
    let b = if a.n() == b.n() {
        b.clone()
    } else {
        let o = Outline::new(b.id.clone(), b.points.clone()).context(|| b.id.clone())?;
        resample(&o, a.n()).context(|| b.id.clone())?
    };
    let path = geodesic_path(a, &b, steps, &RegistrationOptions::default()).context(|| "morph".into())?;
    let pts: Vec<Vec<Point>> = path.shapes.iter().map(|s| s.points.clone()).collect();
    let svg = svg::morph_strip(&pts);
    Ok((path, svg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(id: &str, n: usize, k: f64, amp: f64) -> ShapeSample {
        let pts = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                let r = 1.0 + amp * (k * t).cos();
                Point::new(r * t.cos(), r * t.sin())
            })
            .collect();
        ShapeSample::new(id, Some("c".into()), pts).unwrap()
    }

    #[test]
    fn identical_class_means_coincide() {
        let shapes: Vec<ShapeSample> = (0..3).map(|i| star(&format!("s{i}"), 60, 3.0, 0.2)).collect();
        let lin = linear_mean(&shapes).unwrap();
        let kar = karcher_mean_shape(&shapes).unwrap();
        let gap = lin.iter().zip(&kar).map(|(a, b)| (*a - *b).norm()).fold(0.0, f64::max);
        assert!(gap < 1e-6, "{gap}");
    }

    #[test]
    fn linear_mean_shrinks_karcher_keeps_length() {
        // Two stars whose lobes interleave.
        let a = star("a", 120, 5.0, 0.35);
        let b = star("b", 120, 5.0, -0.35);
        let pa = unit_size(&a.points);
        let pb = unit_size(&b.points);
        let (la, lb) = (geometry::perimeter(&pa), geometry::perimeter(&pb));
        let lin = linear_mean(&[a.clone(), b.clone()]).unwrap();
        let ll = geometry::perimeter(&lin);
        assert!(ll < la && ll < lb);
        let kar = karcher_mean_shape(&[a, b]).unwrap();
        let lk = geometry::perimeter(&kar);
        let avg = 0.5 * (la + lb);
        assert!((lk - avg).abs() < 0.15 * avg, "{lk} vs {avg}");
    }

    #[test]
    fn ingest_outline_file_with_resampling() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sq.csv");
        fs::write(&p, "x,y\n0,0\n0,4\n4,4\n4,0\n").unwrap();
        let s = ingest_file(&p, Some("box".into()), &IngestOptions { n_points: Some(16), ..Default::default() }).unwrap();
        assert_eq!((s.id.as_str(), s.n(), s.label.as_deref()), ("sq", 16, Some("box")));
        assert!(geometry::signed_area(&s.points) > 0.0);
    }
}
