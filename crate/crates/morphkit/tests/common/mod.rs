#![allow(dead_code)]

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use morphkit::core::{Point, ShapeSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Radial Fourier outline `r(t) = 1 + Σ a_k cos(k t) + b_k sin(k t)`,
/// sampled at equal angles.
pub fn radial(id: &str, n: usize, coeffs: &[(f64, f64)]) -> ShapeSample {
    let pts = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            let r = 1.0
                + coeffs.iter().enumerate().map(|(k, (a, b))| {
                    let f = (k + 2) as f64;
                    a * (f * t).cos() + b * (f * t).sin()
                }).sum::<f64>();
            Point::new(r * t.cos(), r * t.sin())
        })
        .collect();
    ShapeSample::new(id, None, pts).unwrap()
}

/// A smooth random star with harmonics 2..=5.
pub fn random_star(id: &str, n: usize, rng: &mut ChaCha8Rng) -> ShapeSample {
    let coeffs: Vec<(f64, f64)> =
        (0..4).map(|k| {
            let amp = 0.18 / (1.0 + k as f64);
            (rng.random_range(-amp..amp), rng.random_range(-amp..amp))
        }).collect();
    radial(id, n, &coeffs)
}

/// Rotation by `theta`, scale, translation and a cyclic start shift.
pub fn transform(s: &ShapeSample, theta: f64, scale: f64, shift: Point, start: usize) -> ShapeSample {
    let (c, sn) = (theta.cos(), theta.sin());
    let moved = s.map_points(|p| Point::new(c * p.x - sn * p.y, sn * p.x + c * p.y) * scale + shift);
    moved.shifted_start(start)
}

/// Labeled synthetic classes: each class is a base star plus small noise in
/// its coefficients, randomly posed.
pub fn synthetic_classes(classes: usize, per_class: usize, n: usize, seed: u64) -> Vec<ShapeSample> {
    let mut r = rng(seed);
    let bases: Vec<Vec<(f64, f64)>> = (0..classes)
        .map(|_| (0..4).map(|k| {
            let amp = 0.25 / (1.0 + k as f64);
            (r.random_range(-amp..amp), r.random_range(-amp..amp))
        }).collect())
        .collect();
    let mut out = Vec::new();
    for (c, base) in bases.iter().enumerate() {
        for m in 0..per_class {
            let coeffs: Vec<(f64, f64)> =
                base.iter().map(|(a, b)| (a + r.random_range(-0.02..0.02), b + r.random_range(-0.02..0.02))).collect();
            let s = radial(&format!("c{c}_{m:02}"), n, &coeffs);
            let posed = transform(&s, r.random_range(-0.2..0.2), r.random_range(0.5..2.0), Point::new(r.random_range(-5.0..5.0), r.random_range(-5.0..5.0)), 0);
            out.push(ShapeSample { label: Some(format!("class{c}")), ..posed });
        }
    }
    out
}

/// Writes shapes as CSV files plus a manifest listing them.
pub fn write_manifest(dir: &Path, shapes: &[ShapeSample], n_points: usize) -> std::path::PathBuf {
    let data = dir.join("outlines");
    fs::create_dir_all(&data).unwrap();
    let mut manifest = format!("name = \"synthetic\"\nn_points = {n_points}\n");
    for s in shapes {
        let file = data.join(format!("{}.csv", s.id));
        morphkit::shapes::write_csv(s, &file).unwrap();
        manifest.push_str(&format!(
            "\n[[shapes]]\npath = \"outlines/{}.csv\"\nlabel = \"{}\"\n",
            s.id,
            s.label.as_deref().unwrap()
        ));
    }
    let path = dir.join("manifest.toml");
    fs::write(&path, manifest).unwrap();
    path
}

/// Circle or square outline, `n` points, starting at angle `phase`.
pub fn circle_or_square(id: &str, square: bool, n: usize, size: f64, phase: f64) -> ShapeSample {
    let pts = (0..n)
        .map(|i| {
            let t = phase + TAU * i as f64 / n as f64;
            let (c, s) = (t.cos(), t.sin());
            let r = if square { size / c.abs().max(s.abs()) } else { size };
            Point::new(r * c, r * s)
        })
        .collect();
    ShapeSample::new(id, Some(if square { "square" } else { "circle" }.into()), pts).unwrap()
}
