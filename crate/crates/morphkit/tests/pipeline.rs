mod common;

use std::fs;

use common::*;
use morphkit::config::{DatasetManifest, Settings, SweepLists, SweepSpec};
use morphkit::pipeline::{run_pipeline, sweep, Report};

fn settings() -> Settings {
    Settings { k: Some("1:3".into()), replicates: Some(10), seed: Some(3), threads: Some(2), ..Default::default() }
}

#[test]
fn eigen_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let shapes = synthetic_classes(2, 5, 60, 1);
    let manifest = DatasetManifest::load(&write_manifest(dir.path(), &shapes, 48)).unwrap();
    let s = settings();
    let out = dir.path().join("run");
    let run = run_pipeline(&manifest, &s.method("eigen").unwrap(), &s, &out).unwrap();
    for f in ["labels.csv", "dist.csv", "report.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert_eq!(fs::read_dir(out.join("shapes")).unwrap().count(), 10);
    assert_eq!(fs::read_dir(out.join("aligned")).unwrap().count(), 10);
    let report: Report = serde_json::from_str(&fs::read_to_string(&run.report).unwrap()).unwrap();
    assert_eq!(report.provenance.method.as_deref(), Some("eigen"));
    assert_eq!(report.provenance.seed, Some(3));
    assert!((0.0..=1.0).contains(&report.summary.best_mean_f1));
    let dist = fs::read_to_string(&run.distances).unwrap();
    assert!(dist.starts_with("# provenance {"));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let shapes = synthetic_classes(2, 5, 60, 2);
    let manifest = DatasetManifest::load(&write_manifest(dir.path(), &shapes, 40)).unwrap();
    let s = settings();
    let method = s.method("gc").unwrap();
    let a = run_pipeline(&manifest, &method, &s, &dir.path().join("a")).unwrap();
    let b = run_pipeline(&manifest, &method, &s, &dir.path().join("b")).unwrap();
    assert_eq!(fs::read(a.report).unwrap(), fs::read(b.report).unwrap());
    assert_eq!(fs::read(a.distances).unwrap(), fs::read(b.distances).unwrap());
}

#[test]
fn srvf_separates_circles_from_squares() {
    let dir = tempfile::tempdir().unwrap();
    let mut shapes = Vec::new();
    for i in 0..10 {
        let phase = 0.37 * i as f64;
        shapes.push(circle_or_square(&format!("circle{i}"), false, 120, 1.0 + 0.1 * i as f64, phase));
        shapes.push(circle_or_square(&format!("square{i}"), true, 120, 1.0 + 0.1 * i as f64, phase));
    }
    let manifest = DatasetManifest::load(&write_manifest(dir.path(), &shapes, 64)).unwrap();
    let s = settings();
    let run = run_pipeline(&manifest, &s.method("srvf").unwrap(), &s, &dir.path().join("run")).unwrap();
    assert_eq!(run.summary.best_mean_f1, 1.0);
}

#[test]
fn sweep_of_one_matches_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let shapes = synthetic_classes(2, 6, 60, 4);
    let manifest = DatasetManifest::load(&write_manifest(dir.path(), &shapes, 40)).unwrap();
    let s = settings();
    let run = run_pipeline(&manifest, &s.method("eigen").unwrap(), &s, &dir.path().join("run")).unwrap();
    let ingested = morphkit::pipeline::ingest_manifest(&manifest, &s).unwrap();
    let lists = SweepLists { variance: vec![0.99], ..Default::default() };
    let rows = sweep(&ingested, &SweepSpec::build("eigen", &lists, &s).unwrap(), &s).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].mean_f1, Some(run.summary.best_mean_f1));
    assert_eq!(rows[0].best_k, Some(run.summary.best_k));
}

#[test]
fn sweep_rows_are_ranked() {
    let shapes = synthetic_classes(3, 5, 40, 5);
    let s = settings();
    let lists = SweepLists { variance: vec![0.5, 0.9, 1.0], ..Default::default() };
    let rows = sweep(&shapes, &SweepSpec::build("eigen", &lists, &s).unwrap(), &s).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[0].mean_f1.unwrap() >= w[1].mean_f1.unwrap()));
}

#[test]
fn default_gc_grid_has_48_points() {
    let shapes = synthetic_classes(2, 4, 32, 6);
    let s = Settings { replicates: Some(2), ..settings() };
    let spec = SweepSpec::build("gc", &SweepLists::default(), &s).unwrap();
    assert_eq!(spec.grid.len(), 48);
    let small = SweepSpec { grid: spec.grid[..2].to_vec(), ..spec };
    assert_eq!(sweep(&shapes, &small, &s).unwrap().len(), 2);
}
