//! Settings files, dataset manifests, presets and sweep grids.

use std::fs;
use std::path::{Path, PathBuf};

use morphkit_core::classify::{EvaluationConfig, SplitSpec};
use morphkit_core::currents::CurrentConfig;
use morphkit_core::lddmm::LddmmConfig;
use morphkit_core::outline::{LEAF_POINTS, SHELL_POINTS, VASE_POINTS};
use morphkit_core::srvf::SeedSearch;
use serde::{Deserialize, Serialize};

use crate::compute::Method;
use crate::error::{Error, Result};

/// A named dataset's point count and published train:test ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub n_points: usize,
    pub split: SplitSpec,
}

pub const PRESETS: [Preset; 3] = [
    Preset { name: "vases", n_points: VASE_POINTS, split: SplitSpec::VASES },
    Preset { name: "leaves", n_points: LEAF_POINTS, split: SplitSpec::LEAVES },
    Preset { name: "shells", n_points: SHELL_POINTS, split: SplitSpec::SHELLS },
];

pub fn preset(name: &str) -> Result<Preset> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .copied()
        .ok_or_else(|| Error::Usage(format!("unknown preset {name:?} (vases, leaves, shells)")))
}

/// `"3:12"` or `"5"`.
pub fn parse_k_range(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Usage(format!("bad k range {text:?}, expected MIN:MAX"));
    let (lo, hi) = match text.split_once(':') {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let k = text.trim().parse().map_err(|_| bad())?;
            (k, k)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// `0.5`, `480:236`, `per-class:20`, or a preset name.
pub fn parse_split(text: &str) -> Result<SplitSpec> {
    let bad = || Error::Usage(format!("bad split {text:?}"));
    let text = text.trim();
    if let Ok(p) = preset(text) {
        return Ok(p.split);
    }
    if let Some(c) = text.strip_prefix("per-class:") {
        return Ok(SplitSpec::PerClass(c.parse().map_err(|_| bad())?));
    }
    if let Some((a, b)) = text.split_once(':') {
        let (train, test) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if train == 0 || test == 0 {
            return Err(bad());
        }
        return Ok(SplitSpec::Ratio { train, test });
    }
    let f: f64 = text.parse().map_err(|_| bad())?;
    if !(f > 0.0 && f < 1.0) {
        return Err(bad());
    }
    Ok(SplitSpec::Fraction(f))
}

pub fn parse_seeds(text: &str) -> Result<SeedSearch> {
    match text {
        "coarse" => Ok(SeedSearch::Coarse),
        "all" => Ok(SeedSearch::All),
        "fixed" => Ok(SeedSearch::Fixed),
        _ => Err(Error::Usage(format!("bad seed search {text:?} (coarse, all, fixed)"))),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenSettings {
    pub variance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SrvfSettings {
    pub seeds: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GcSettings {
    pub s: Option<usize>,
    pub m: Option<usize>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LddmmSettings {
    pub kernel_width: Option<f64>,
    pub lambda: Option<f64>,
    pub timesteps: Option<usize>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
}

/// Everything a run can be configured with. Each field is optional so a
/// file and the command line can be layered; see [`Settings::overlay`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub k: Option<String>,
    pub split: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub n_points: Option<usize>,
    pub threshold: Option<f64>,
    pub symmetrize: Option<bool>,
    pub eigen: EigenSettings,
    pub srvf: SrvfSettings,
    pub gc: GcSettings,
    pub lddmm: LddmmSettings,
}

macro_rules! overlay_fields {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::format(path, e))
    }

    /// Values set in `top` replace ours.
    pub fn overlay(mut self, top: &Settings) -> Self {
        overlay_fields!(self, top, threads, seed, replicates, k, split, cache_dir, n_points, threshold, symmetrize);
        overlay_fields!(self.eigen, top.eigen, variance);
        overlay_fields!(self.srvf, top.srvf, seeds);
        overlay_fields!(self.gc, top.gc, s, m, sigma);
        overlay_fields!(self.lddmm, top.lddmm, kernel_width, lambda, timesteps, max_iters, grad_tol);
        self
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(0)
    }

    /// The settings that determine results. Thread count and cache location
    /// are left out so artifacts do not depend on them.
    pub fn for_provenance(&self) -> Settings {
        Settings { threads: None, cache_dir: None, ..self.clone() }
    }

    pub fn evaluation(&self) -> Result<EvaluationConfig> {
        let d = EvaluationConfig::default();
        let (k_min, k_max) = match &self.k {
            Some(k) => parse_k_range(k)?,
            None => (d.k_min, d.k_max),
        };
        let split = match &self.split {
            Some(s) => parse_split(s)?,
            None => d.split,
        };
        Ok(EvaluationConfig {
            split,
            k_min,
            k_max,
            replicates: self.replicates.unwrap_or(d.replicates),
            seed: self.seed.unwrap_or(d.seed),
        })
    }

    pub fn current_config(&self) -> CurrentConfig {
        let d = CurrentConfig::default();
        CurrentConfig { s: self.gc.s.unwrap_or(d.s), m: self.gc.m.unwrap_or(d.m), sigma: self.gc.sigma.unwrap_or(d.sigma) }
    }

    pub fn lddmm_config(&self) -> LddmmConfig {
        let d = LddmmConfig::default();
        let l = &self.lddmm;
        LddmmConfig {
            kernel_width: l.kernel_width.unwrap_or(d.kernel_width),
            lambda: l.lambda.unwrap_or(d.lambda),
            timesteps: l.timesteps.unwrap_or(d.timesteps),
            max_iters: l.max_iters.unwrap_or(d.max_iters),
            grad_tol: l.grad_tol.unwrap_or(d.grad_tol),
        }
    }

    pub fn method(&self, name: &str) -> Result<Method> {
        let m = match name {
            "eigen" => Method::Eigen { variance: self.eigen.variance.unwrap_or(0.99) },
            "srvf" => Method::Srvf { seeds: parse_seeds(self.srvf.seeds.as_deref().unwrap_or("coarse"))? },
            "gc" => Method::Gc(self.current_config()),
            "lddmm" => Method::Lddmm(self.lddmm_config()),
            _ => return Err(Error::Usage(format!("unknown method {name:?} (eigen, srvf, gc, lddmm)"))),
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
}

/// A labeled collection of images or outline files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub n_points: Option<usize>,
    /// Permit an `n_points` different from the preset's.
    #[serde(default)]
    pub override_n_points: bool,
    #[serde(default)]
    pub symmetrize: bool,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub shapes: Vec<ManifestEntry>,
    /// Alternatively, every shape file in a directory ...
    #[serde(default)]
    pub shapes_dir: Option<PathBuf>,
    /// ... labeled by an `id,label` table.
    #[serde(default)]
    pub labels: Option<PathBuf>,
    /// Directory relative paths are resolved against; set on load.
    #[serde(skip)]
    pub root: PathBuf,
}

fn default_threshold() -> f64 {
    0.5
}

impl DatasetManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: DatasetManifest = toml::from_str(&text).map_err(|e| Error::format(path, e))?;
        m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate().map_err(|e| match e {
            Error::Usage(msg) => Error::format(path, msg),
            other => other,
        })?;
        Ok(m)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.root.join(p)
        }
    }

    pub fn n_points(&self) -> Result<usize> {
        let from_preset = self.preset.as_deref().map(preset).transpose()?.map(|p| p.n_points);
        match (self.n_points, from_preset) {
            (Some(n), Some(p)) if n != p && !self.override_n_points => Err(Error::Usage(format!(
                "n_points {n} differs from the {} preset ({p}); set override_n_points = true",
                self.preset.as_deref().unwrap_or_default()
            ))),
            (Some(n), _) | (None, Some(n)) => Ok(n),
            (None, None) => Err(Error::Usage("manifest needs n_points or a preset".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.n_points()?;
        if self.shapes.is_empty() && self.shapes_dir.is_none() {
            return Err(Error::Usage("manifest lists no shapes".into()));
        }
        for e in &self.shapes {
            if e.label.trim().is_empty() {
                return Err(Error::Usage(format!("{}: empty label", e.path.display())));
            }
            let p = self.resolve(&e.path);
            if !p.is_file() {
                return Err(Error::Usage(format!("{}: not found", p.display())));
            }
        }
        if let Some(dir) = &self.shapes_dir {
            if !self.resolve(dir).is_dir() {
                return Err(Error::Usage(format!("{}: not a directory", dir.display())));
            }
            if self.labels.is_none() {
                return Err(Error::Usage("shapes_dir needs a labels table".into()));
            }
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Usage(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        Ok(())
    }
}

/// The parameter grid of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub method: String,
    pub grid: Vec<Method>,
}

/// Grid lists; empty lists fall back to the method's default grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepLists {
    pub variance: Vec<f64>,
    pub s: Vec<usize>,
    pub m: Vec<usize>,
    pub sigma: Vec<f64>,
    pub seeds: Vec<String>,
    pub kernel_width: Vec<f64>,
    pub lambda: Vec<f64>,
}

fn or_default<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

impl SweepSpec {
    pub fn build(method: &str, lists: &SweepLists, base: &Settings) -> Result<Self> {
        let grid: Vec<Method> = match method {
            "eigen" => or_default(&lists.variance, &[0.75, 0.8, 0.85, 0.9, 0.95, 0.99, 0.999])
                .into_iter()
                .map(|variance| Method::Eigen { variance })
                .collect(),
            "gc" => {
                let mut g = Vec::new();
                for s in or_default(&lists.s, &[1, 2, 3, 4]) {
                    for sigma in or_default(&lists.sigma, &[1.0, 2.0, 3.0, 4.0]) {
                        for m in or_default(&lists.m, &[16, 20, 24]) {
                            g.push(Method::Gc(CurrentConfig { s, m, sigma }));
                        }
                    }
                }
                g
            }
            "srvf" => or_default(&lists.seeds, &["coarse".to_string()])
                .iter()
                .map(|s| Ok(Method::Srvf { seeds: parse_seeds(s)? }))
                .collect::<Result<_>>()?,
            "lddmm" => {
                let d = base.lddmm_config();
                let mut g = Vec::new();
                for kernel_width in or_default(&lists.kernel_width, &[0.25, 0.5, 1.0]) {
                    for lambda in or_default(&lists.lambda, &[d.lambda]) {
                        g.push(Method::Lddmm(LddmmConfig { kernel_width, lambda, ..d }));
                    }
                }
                g
            }
            other => return Err(Error::Usage(format!("unknown method {other:?}"))),
        };
        let spec = SweepSpec { method: method.to_string(), grid };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Usage("empty sweep grid".into()));
        }
        for m in &self.grid {
            if m.name() != self.method {
                return Err(Error::Usage(format!("grid mixes {} into a {} sweep", m.name(), self.method)));
            }
            m.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: Settings = toml::from_str("seed = 3\nk = \"2:5\"\n[gc]\nm = 24\nsigma = 2.0\n").unwrap();
        let flags = Settings { seed: Some(9), gc: GcSettings { s: Some(4), ..Default::default() }, ..Default::default() };
        let eff = file.overlay(&flags);
        assert_eq!(eff.seed, Some(9));
        assert_eq!(eff.current_config(), CurrentConfig { s: 4, m: 24, sigma: 2.0 });
        assert_eq!(eff.evaluation().unwrap().k_min, 2);
        assert!(toml::from_str::<Settings>("sede = 1").is_err());
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_k_range("3:12").unwrap(), (3, 12));
        assert_eq!(parse_k_range("4").unwrap(), (4, 4));
        assert!(parse_k_range("5:2").is_err());
        assert_eq!(parse_split("vases").unwrap(), SplitSpec::VASES);
        assert_eq!(parse_split("0.3").unwrap(), SplitSpec::Fraction(0.3));
        assert_eq!(parse_split("per-class:7").unwrap(), SplitSpec::PerClass(7));
        assert_eq!(parse_split("120:115").unwrap(), SplitSpec::SHELLS);
        assert!(parse_split("1.5").is_err());
    }

    #[test]
    fn gc_grid_has_48_cells() {
        let spec = SweepSpec::build("gc", &SweepLists::default(), &Settings::default()).unwrap();
        assert_eq!(spec.grid.len(), 48);
        let eigen = SweepLists { variance: vec![0.75, 0.9, 0.999], ..Default::default() };
        assert_eq!(SweepSpec::build("eigen", &eigen, &Settings::default()).unwrap().grid.len(), 3);
        let bad = SweepLists { m: vec![1], ..Default::default() };
        assert!(SweepSpec::build("gc", &bad, &Settings::default()).is_err());
    }

    #[test]
    fn manifest_checks() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.csv"), "0,0\n1,0\n1,1\n").unwrap();
        let path = dir.path().join("m.toml");
        fs::write(&path, "name = \"t\"\npreset = \"vases\"\n[[shapes]]\npath = \"a.csv\"\nlabel = \"x\"\n").unwrap();
        assert_eq!(DatasetManifest::load(&path).unwrap().n_points().unwrap(), 139);
        fs::write(&path, "name = \"t\"\npreset = \"vases\"\nn_points = 50\n[[shapes]]\npath = \"a.csv\"\nlabel = \"x\"\n")
            .unwrap();
        assert!(DatasetManifest::load(&path).is_err());
        fs::write(&path, "name = \"t\"\nn_points = 50\n[[shapes]]\npath = \"missing.csv\"\nlabel = \"x\"\n").unwrap();
        assert!(DatasetManifest::load(&path).is_err());
        fs::write(&path, "name = \"t\"\nn_points = 50\n[[shapes]]\npath = \"a.csv\"\nlabel = \"\"\n").unwrap();
        assert!(DatasetManifest::load(&path).is_err());
    }
}
