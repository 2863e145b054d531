//! Command-line interface.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use morphkit_core::currents::{current_pca, current_representation};
use morphkit_core::eigenshape::fit_pca;
use morphkit_core::outline::{generalized_procrustes, resample, Outline, ProcrustesOptions};
use morphkit_core::ShapeSample;

use crate::compute::{distance_matrix, DistmatOptions};
use crate::config::{preset, DatasetManifest, GcSettings, LddmmSettings, Settings, SweepLists, SweepSpec};
use crate::distfile::{read_distances, write_distances};
use crate::error::{Context, Error, Result};
use crate::export::{embedding, write_embedding, write_model};
use crate::pipeline::{self, IngestOptions, MeanKind};
use crate::provenance::{hash_shapes, Provenance};
use crate::shapes::{apply_labels, read_labels, read_shapes, write_shapes};

#[derive(Debug, Parser)]
#[command(name = "morphkit", version, about = "Outline shape analysis: distances, classification, means and morphs")]
pub struct Cli {
    /// TOML settings file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for distance matrices and evaluation (default: all CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MethodArgs {
    /// eigen: fraction of variance kept.
    #[arg(long)]
    pub variance: Option<f64>,
    /// srvf: start-point search (coarse, all, fixed).
    #[arg(long)]
    pub seeds: Option<String>,
    /// gc: B-spline degree.
    #[arg(long)]
    pub s: Option<usize>,
    /// gc: mesh cells per side.
    #[arg(long)]
    pub mesh: Option<usize>,
    /// gc: smoothing width in cells.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// lddmm: Gaussian kernel width.
    #[arg(long)]
    pub kernel: Option<f64>,
    /// lddmm: endpoint mismatch weight.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// lddmm: Euler steps.
    #[arg(long)]
    pub timesteps: Option<usize>,
    /// lddmm: optimizer iterations.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// lddmm: gradient norm tolerance.
    #[arg(long)]
    pub grad_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalArgs {
    /// k range MIN:MAX.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Train share: a fraction, TRAIN:TEST, per-class:N, or a preset name.
    #[arg(long)]
    pub split: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeanMethod {
    Linear,
    Karcher,
    /// Same as karcher.
    Srvf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmbedMethod {
    Eigen,
    Gc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract outlines from images (or clean outline files) into shape JSON.
    Ingest {
        inputs: Vec<PathBuf>,
        /// Iso-level in (0, 1) of the normalized image.
        #[arg(long)]
        threshold: Option<f64>,
        /// Mirror the shorter half about the vertical axis.
        #[arg(long)]
        symmetrize: bool,
        #[arg(long)]
        resample: Option<usize>,
        /// Take the point count from a dataset preset.
        #[arg(long)]
        preset: Option<String>,
        /// id,label table.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Resample shapes to N equally spaced points.
    Resample {
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Generalized Procrustes alignment.
    Align {
        input: PathBuf,
        #[arg(long)]
        allow_reflection: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Pairwise distance matrix.
    Distmat {
        input: PathBuf,
        #[arg(long)]
        method: String,
        #[command(flatten)]
        params: MethodArgs,
        /// Resume file, flushed every 1000 cells.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// lddmm: write every match as JSON into this directory.
        #[arg(long)]
        dump_matches: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// k-NN evaluation over replicate stratified splits.
    Classify {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Evaluate a parameter grid and rank it by mean F1.
    Sweep {
        input: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        method: String,
        #[arg(long, value_delimiter = ',')]
        variance: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        mesh: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        kernel: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Per-class mean shapes as an SVG grid.
    Mean {
        input: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "karcher")]
        method: MeanMethod,
        /// Also write the means as shape JSON here.
        #[arg(long)]
        shapes_out: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Elastic geodesic between two shapes as an SVG strip.
    Morph {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[arg(long)]
        shapes_out: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Principal component scores as CSV.
    Embed {
        input: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "eigen")]
        method: EmbedMethod,
        #[arg(long, default_value_t = 3)]
        dims: usize,
        #[command(flatten)]
        params: MethodArgs,
        /// Write the fitted model as JSON.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Download the outline datasets (vases, leaves, shells or all).
    FetchData {
        #[arg(long, default_value = "all")]
        dataset: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// ingest → resample → align → distmat → classify from a manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        method: String,
        #[command(flatten)]
        params: MethodArgs,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
}

impl MethodArgs {
    fn apply(&self, s: &mut Settings) {
        s.eigen.variance = self.variance;
        s.srvf.seeds = self.seeds.clone();
        s.gc = GcSettings { s: self.s, m: self.mesh, sigma: self.sigma };
        s.lddmm = LddmmSettings {
            kernel_width: self.kernel,
            lambda: self.lambda,
            timesteps: self.timesteps,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
        };
    }
}

impl EvalArgs {
    fn apply(&self, s: &mut Settings) {
        s.k = self.k.clone();
        s.replicates = self.replicates;
        s.seed = self.seed;
        s.split = self.split.clone();
    }
}

/// Settings file overlaid with the flags of this invocation.
fn settings(cli: &Cli) -> Result<Settings> {
    let base = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let mut flags = Settings { threads: cli.threads, ..Default::default() };
    match &cli.command {
        Command::Ingest { threshold, symmetrize, resample, .. } => {
            flags.threshold = *threshold;
            flags.symmetrize = symmetrize.then_some(true);
            flags.n_points = *resample;
        }
        Command::Resample { n, .. } => flags.n_points = *n,
        Command::Distmat { params, cache_dir, .. } => {
            params.apply(&mut flags);
            flags.cache_dir = cache_dir.clone();
        }
        Command::Classify { eval, .. } => eval.apply(&mut flags),
        Command::Sweep { eval, cache_dir, .. } => {
            eval.apply(&mut flags);
            flags.cache_dir = cache_dir.clone();
        }
        Command::Embed { params, .. } => params.apply(&mut flags),
        Command::Run { params, eval, cache_dir, .. } => {
            params.apply(&mut flags);
            eval.apply(&mut flags);
            flags.cache_dir = cache_dir.clone();
        }
        _ => {}
    }
    Ok(base.overlay(&flags))
}

fn load_labeled(input: &Path, labels: Option<&PathBuf>) -> Result<Vec<ShapeSample>> {
    let mut shapes = read_shapes(input)?;
    let table = labels.map(|p| read_labels(p)).transpose()?;
    apply_labels(&mut shapes, table.as_ref(), labels.map(|p| p.as_path()).unwrap_or(input))?;
    Ok(shapes)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn point_count(n: Option<usize>, preset_name: Option<&str>) -> Result<Option<usize>> {
    match (n, preset_name) {
        (Some(n), _) => Ok(Some(n)),
        (None, Some(p)) => Ok(Some(preset(p)?.n_points)),
        (None, None) => Ok(None),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let settings = settings(&cli)?;
    match cli.command {
        Command::Ingest { inputs, preset, labels, out, .. } => {
            let opts = IngestOptions {
                threshold: settings.threshold.unwrap_or(0.5),
                symmetrize: settings.symmetrize.unwrap_or(false),
                n_points: point_count(settings.n_points, preset.as_deref())?,
            };
            let table = labels.as_ref().map(|p| read_labels(p)).transpose()?;
            let files = pipeline::expand_inputs(&inputs)?;
            if files.is_empty() {
                return Err(Error::Usage("no inputs".into()));
            }
            let shapes = files
                .iter()
                .map(|f| {
                    let label = table.as_ref().and_then(|t| t.get(&crate::shapes::file_stem(f)).cloned());
                    pipeline::ingest_file(f, label, &opts)
                })
                .collect::<Result<Vec<_>>>()?;
            write_shapes(&shapes, &out)?;
            eprintln!("ingested {} shapes into {}", shapes.len(), out.display());
        }
        Command::Resample { input, preset, out, .. } => {
            let n = point_count(settings.n_points, preset.as_deref())?
                .ok_or_else(|| Error::Usage("resample needs --n or --preset".into()))?;
            let shapes = read_shapes(&input)?
                .into_iter()
                .map(|s| {
                    let id = s.id.clone();
                    let mut o = Outline::new(s.id, s.points).context(|| id.clone())?;
                    o.label = s.label;
                    resample(&o, n).context(|| id)
                })
                .collect::<Result<Vec<_>>>()?;
            write_shapes(&shapes, &out)?;
            eprintln!("resampled {} shapes to {n} points", shapes.len());
        }
        Command::Align { input, allow_reflection, out } => {
            let shapes = read_shapes(&input)?;
            let options = ProcrustesOptions { allow_reflection, ..Default::default() };
            let gpa = generalized_procrustes(&shapes, options).context(|| "align".into())?;
            write_shapes(&gpa.shapes.iter().map(|p| p.to_sample()).collect::<Vec<_>>(), &out)?;
            eprintln!("aligned {} shapes in {} iterations", shapes.len(), gpa.iterations);
        }
        Command::Distmat { input, method, checkpoint, dump_matches, out, .. } => {
            let method = settings.method(&method)?;
            let shapes = read_shapes(&input)?;
            let options = DistmatOptions {
                threads: settings.threads(),
                checkpoint,
                cache_dir: settings.cache_dir.clone(),
                dump_matches,
                ..Default::default()
            };
            let (matrix, provenance) = distance_matrix(&shapes, &method, &options)?;
            write_distances(&matrix, &provenance.with_config(&settings.for_provenance()), &out)?;
            eprintln!("{} distances for {} shapes written to {}", method.name(), shapes.len(), out.display());
        }
        Command::Classify { dist, labels, out, .. } => {
            let (matrix, prov) = read_distances(&dist)?;
            let table = read_labels(&labels)?;
            let inputs = prov.map(|p| p.inputs).unwrap_or_default();
            let report = pipeline::classify(&matrix, &table, &settings, inputs)?;
            write_text(&out, &pipeline::render_report(&report))?;
            eprintln!("best k = {}, mean F1 = {:.4}", report.summary.best_k, report.summary.best_mean_f1);
        }
        Command::Sweep { input, labels, method, variance, s, mesh, sigma, seeds, kernel, lambda, out, .. } => {
            let shapes = load_labeled(&input, labels.as_ref())?;
            let lists = SweepLists { variance, s, m: mesh, sigma, seeds, kernel_width: kernel, lambda };
            let spec = SweepSpec::build(&method, &lists, &settings)?;
            let rows = pipeline::sweep(&shapes, &spec, &settings)?;
            let prov = Provenance::new("sweep", hash_shapes(&shapes))
                .with_seed(settings.evaluation()?.seed)
                .with_config(&settings.for_provenance());
            let prov = Provenance { method: Some(method), ..prov };
            pipeline::write_sweep(&rows, &prov, &out)?;
            eprintln!("{} grid points ranked into {}", rows.len(), out.display());
        }
        Command::Mean { input, labels, method, shapes_out, out } => {
            let shapes = load_labeled(&input, labels.as_ref())?;
            let kind = if method == MeanMethod::Linear { MeanKind::Linear } else { MeanKind::Karcher };
            let (means, svg) = pipeline::export_means(&shapes, kind)?;
            write_text(&out, &svg)?;
            if let Some(dir) = shapes_out {
                let samples = means
                    .into_iter()
                    .map(|(label, pts)| ShapeSample::new(format!("mean_{label}"), Some(label), pts))
                    .collect::<morphkit_core::Result<Vec<_>>>()?;
                write_shapes(&samples, &dir)?;
            }
        }
        Command::Morph { a, b, steps, shapes_out, out } => {
            let (a, b) = (crate::shapes::read_shape(&a)?, crate::shapes::read_shape(&b)?);
            let (path, svg) = pipeline::morph(&a, &b, steps)?;
            write_text(&out, &svg)?;
            if let Some(dir) = shapes_out {
                write_shapes(&path.shapes, &dir)?;
            }
            eprintln!("geodesic distance {:.6}, path energy {:.6}", path.endpoint_distance, path.energy);
        }
        Command::Embed { input, labels, method, dims, model, out, .. } => {
            let shapes = load_labeled(&input, labels.as_ref())?;
            let (fitted, items, name, params) = match method {
                EmbedMethod::Eigen => {
                    let pre = morphkit_core::outline::procrustes_align(&shapes).context(|| "align".into())?;
                    let m = fit_pca(&pre).context(|| "pca".into())?;
                    let items: Vec<_> = pre.iter().map(|p| (p.id.clone(), p.label.clone(), p.to_vector())).collect();
                    (m, items, "eigen", Default::default())
                }
                EmbedMethod::Gc => {
                    let config = settings.current_config();
                    let reps = shapes
                        .iter()
                        .map(|s| current_representation(s, &config).context(|| s.id.clone()))
                        .collect::<Result<Vec<_>>>()?;
                    let m = current_pca(&reps).context(|| "pca".into())?;
                    let items: Vec<_> = reps
                        .iter()
                        .zip(&shapes)
                        .map(|(r, s)| (s.id.clone(), s.label.clone(), r.coefficients.clone()))
                        .collect();
                    (m, items, "gc", config.params())
                }
            };
            let rows = embedding(&fitted, &items, dims)?;
            let prov = Provenance::new("embed", hash_shapes(&shapes)).with_method(name, params);
            write_embedding(&rows, &prov, &out)?;
            if let Some(path) = model {
                write_model(&fitted, &prov, &path)?;
            }
        }
        Command::FetchData { dataset, out } => {
            for d in crate::fetch::dataset(&dataset)? {
                let files = crate::fetch::fetch(&d, &out)?;
                eprintln!("{}: {} files", d.name, files.len());
            }
        }
        Command::Run { manifest, method, out, .. } => {
            let manifest = DatasetManifest::load(&manifest)?;
            let method = settings.method(&method)?;
            let result = pipeline::run_pipeline(&manifest, &method, &settings, &out)?;
            eprintln!(
                "{}: best k = {}, mean F1 = {:.4}; report in {}",
                manifest.name,
                result.summary.best_k,
                result.summary.best_mean_f1,
                result.report.display()
            );
        }
    }
    Ok(())
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("morphkit: {e}");
            e.exit_kind() as i32
        }
    }
}
