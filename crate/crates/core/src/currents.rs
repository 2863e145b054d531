//! Geometric currents: a closed curve acts on vector test fields by
//! `φ ↦ ∮ φ(c(t)) · ċ(t) dt`. Evaluating it against a finite grid basis gives
//! a Euclidean embedding in which distances are plain Frobenius norms.
//!
//! Basis: tensor-product uniform B-splines of degree `s` on an `m × m` mesh
//! over the unit square (`(m + s)²` functions), followed by a discrete
//! Gaussian blur of width `σ` cells across neighboring basis functions. The
//! coefficient matrix has shape `2·(m + s) × (m + s)`: the x-component block
//! on top of the y-component block.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::classify::DistanceMatrix;
use crate::eigenshape::{fit_pca_vectors, EigenModel};
use crate::geometry::{self, Point};
use crate::outline::ShapeSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurrentConfig {
    /// B-spline degree of the basis.
    pub s: usize,
    /// Mesh cells per side.
    pub m: usize,
    /// Gaussian smoothing width, in cells. 0 disables smoothing.
    pub sigma: f64,
}

impl Default for CurrentConfig {
    fn default() -> Self {
        CurrentConfig { s: 2, m: 20, sigma: 1.0 }
    }
}

impl CurrentConfig {
    /// Basis functions per axis.
    pub fn side(&self) -> usize {
        self.m + self.s
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::ConfigOutOfRange("mesh size m must be at least 2"));
        }
        if self.s > 8 {
            return Err(Error::ConfigOutOfRange("basis order s must be at most 8"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::ConfigOutOfRange("sigma must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        p.insert(String::from("s"), format!("{}", self.s));
        p.insert(String::from("m"), format!("{}", self.m));
        p.insert(String::from("sigma"), format!("{}", self.sigma));
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentRep {
    /// Id of the source sample.
    pub id: String,
    pub config: CurrentConfig,
    /// Row-major `2·side × side` matrix.
    pub coefficients: Vec<f64>,
}

impl CurrentRep {
    pub fn rows(&self) -> usize {
        2 * self.config.side()
    }

    pub fn cols(&self) -> usize {
        self.config.side()
    }

    /// Coefficient of basis function `(ix, iy)` for `component` 0 (x) or 1 (y).
    pub fn get(&self, component: usize, ix: usize, iy: usize) -> f64 {
        let side = self.config.side();
        self.coefficients[(component * side + iy) * side + ix]
    }

    /// Sum of one component's coefficients, i.e. the pairing with a
    /// constant unit field along that axis.
    pub fn constant_field_pairing(&self, component: usize) -> f64 {
        let side = self.config.side();
        self.coefficients[component * side * side..(component + 1) * side * side].iter().sum()
    }
}

/// Cardinal B-spline of degree `s`, supported on `[0, s + 1]`.
fn cardinal_bspline(s: usize, u: f64) -> f64 {
    if u < 0.0 || u >= (s + 1) as f64 {
        return 0.0;
    }
    if s == 0 {
        return 1.0;
    }
    let sf = s as f64;
    (u * cardinal_bspline(s - 1, u) + (sf + 1.0 - u) * cardinal_bspline(s - 1, u - 1.0)) / sf
}

/// Non-zero 1-D basis values at `x ∈ [0, 1]`: `(first index, values)`.
fn basis_1d(x: f64, config: &CurrentConfig) -> (usize, Vec<f64>) {
    let scaled = x * config.m as f64;
    let cell = (scaled.floor() as usize).min(config.m - 1);
    // Basis i lives on [(i - s)/m, (i + 1)/m]; cell c touches i = c..=c+s.
    let values = (0..=config.s)
        .map(|k| cardinal_bspline(config.s, scaled - (cell + k) as f64 + config.s as f64))
        .collect();
    (cell, values)
}

/// Discrete Gaussian weights for offsets `-r..=r`, normalized to sum 1.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![1.0];
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let w: Vec<f64> = (-radius..=radius).map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Reflects an index into `0..len` (mirror at both ends, repeatedly).
fn reflect(i: isize, len: usize) -> usize {
    let period = 2 * len as isize;
    let r = i.rem_euclid(period);
    if r < len as isize {
        r as usize
    } else {
        (period - 1 - r) as usize
    }
}

/// Separable blur of a `side × side` grid. Reflection at the borders keeps
/// the total mass, so constant-field pairings are unchanged.
fn blur(grid: &[f64], side: usize, kernel: &[f64]) -> Vec<f64> {
    if kernel.len() == 1 {
        return grid.to_vec();
    }
    let radius = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; side * side];
    for iy in 0..side {
        for ix in 0..side {
            let v = grid[iy * side + ix];
            if v == 0.0 {
                continue;
            }
            for (k, w) in kernel.iter().enumerate() {
                let tx = reflect(ix as isize + k as isize - radius, side);
                tmp[iy * side + tx] += w * v;
            }
        }
    }
    let mut out = vec![0.0; side * side];
    for iy in 0..side {
        for ix in 0..side {
            let v = tmp[iy * side + ix];
            if v == 0.0 {
                continue;
            }
            for (k, w) in kernel.iter().enumerate() {
                let ty = reflect(iy as isize + k as isize - radius, side);
                out[ty * side + ix] += w * v;
            }
        }
    }
    out
}

/// Places the curve in the unit square: centroid to `(0.5, 0.5)` and total
/// length to 0.8. A closed curve of length 1 lies within 0.5 of its
/// centroid, so this leaves at least a 10% margin on every side.
fn normalize_into_square(points: &[Point]) -> Result<Vec<Point>> {
    let length = geometry::perimeter(points);
    if length == 0.0 || !length.is_finite() {
        return Err(Error::DegenerateCurve);
    }
    let c = geometry::centroid(points);
    let scale = 0.8 / length;
    Ok(points.iter().map(|p| (*p - c) * scale + Point::new(0.5, 0.5)).collect())
}

/// Coefficients of the curve's current against the smoothed grid basis,
/// by midpoint quadrature over the closed polygon's segments.
pub fn current_representation(sample: &ShapeSample, config: &CurrentConfig) -> Result<CurrentRep> {
    config.validate()?;
    let pts = normalize_into_square(&sample.points)?;
    let side = config.side();
    let mut gx = vec![0.0; side * side];
    let mut gy = vec![0.0; side * side];
    let n = pts.len();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let mid = a.lerp(b, 0.5);
        let tangent = b - a;
        let (cx, wx) = basis_1d(mid.x, config);
        let (cy, wy) = basis_1d(mid.y, config);
        for (ky, vy) in wy.iter().enumerate() {
            for (kx, vx) in wx.iter().enumerate() {
                let idx = (cy + ky) * side + cx + kx;
                let w = vx * vy;
                gx[idx] += w * tangent.x;
                gy[idx] += w * tangent.y;
            }
        }
    }
    let kernel = gaussian_kernel(config.sigma);
    let mut coefficients = blur(&gx, side, &kernel);
    coefficients.extend(blur(&gy, side, &kernel));
    Ok(CurrentRep { id: sample.id.clone(), config: *config, coefficients })
}

/// Frobenius distances between coefficient matrices.
pub fn current_distances(reps: &[CurrentRep]) -> Result<DistanceMatrix> {
    let config = reps.first().map(|r| r.config);
    if reps.iter().any(|r| Some(r.config) != config) {
        return Err(Error::ConfigMismatch);
    }
    let ids = reps.iter().map(|r| r.id.clone()).collect();
    let params = config.map(|c| c.params()).unwrap_or_default();
    DistanceMatrix::from_fn(ids, "gc", params, |i, j| Ok(frobenius_distance(&reps[i], &reps[j])))
}

pub fn frobenius_distance(a: &CurrentRep, b: &CurrentRep) -> f64 {
    a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// PCA over flattened coefficient matrices.
pub fn current_pca(reps: &[CurrentRep]) -> Result<EigenModel> {
    let config = reps.first().map(|r| r.config);
    if reps.iter().any(|r| Some(r.config) != config) {
        return Err(Error::ConfigMismatch);
    }
    let vectors: Vec<Vec<f64>> = reps.iter().map(|r| r.coefficients.clone()).collect();
    fit_pca_vectors(&vectors)
}
