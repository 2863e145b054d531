//! Geodesic paths, path energy and Karcher means on the pre-shape sphere.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::registration::{align, srvf_distance, Registration, RegistrationOptions};
use super::{arc_distance, inner, l2_norm, normalized, srvf_inverse, to_srvf, SrvfCurve};
use crate::geometry::{cyclic_shift, Point};
use crate::outline::ShapeSample;
use crate::{Error, Result};

/// `κ + 1` shapes from a source to a registered target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub steps: usize,
    pub shapes: Vec<ShapeSample>,
    /// Sum of consecutive (unregistered) distances along the path.
    pub energy: f64,
    /// Great-circle angle between the registered endpoints.
    pub endpoint_distance: f64,
    pub registration: Registration,
}

/// Point at fraction `t` of the great circle from `a` to `b`, both unit
/// norm and `theta` apart.
fn slerp(a: &[Point], b: &[Point], theta: f64, t: f64) -> Vec<Point> {
    if theta < 1e-9 {
        let mixed: Vec<Point> = a.iter().zip(b).map(|(x, y)| x.lerp(*y, t)).collect();
        return normalized(&mixed);
    }
    let s = theta.sin();
    let (wa, wb) = (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s);
    a.iter().zip(b).map(|(x, y)| *x * wa + *y * wb).collect()
}

/// Geodesic from `a` to `b` in `steps` segments.
///
/// `b` is registered onto `a` once; the path is then the great circle
/// between the two SRVFs, sampled at `j/steps` and integrated back with
/// linearly interpolated length and start point.
pub fn geodesic_path(a: &ShapeSample, b: &ShapeSample, steps: usize, opts: &RegistrationOptions) -> Result<GeodesicPath> {
    if steps < 2 {
        return Err(Error::ConfigOutOfRange("geodesic paths need at least 2 steps"));
    }
    if a.n() != b.n() {
        return Err(Error::LengthMismatch(a.n(), b.n()));
    }
    let (qa, qb) = (to_srvf(a)?, to_srvf(b)?);
    let aligned = align(&qa, &qb, opts)?;
    let reg = &aligned.registration;
    let theta = aligned.distance;

    let (len_a, len_b) = (a.perimeter(), b.perimeter());
    let anchor_a = a.points[0];
    let start_b = cyclic_shift(&b.points, reg.seed_shift)[0];
    let anchor_b = reg.rotation.apply(start_b);

    let shapes: Vec<ShapeSample> = (0..=steps)
        .map(|j| {
            let t = j as f64 / steps as f64;
            let q = SrvfCurve { id: format!("{}->{}#{j}", a.id, b.id), q: slerp(&qa.q, &aligned.q, theta, t) };
            let mut shape = srvf_inverse(&q, len_a + (len_b - len_a) * t, anchor_a.lerp(anchor_b, t));
            shape.label = a.label.clone();
            shape
        })
        .collect();
    let energy = path_energy_with(&shapes, &RegistrationOptions::none())?;
    Ok(GeodesicPath { steps, shapes, energy, endpoint_distance: theta, registration: aligned.registration })
}

fn path_energy_with(shapes: &[ShapeSample], opts: &RegistrationOptions) -> Result<f64> {
    if shapes.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: shapes.len() });
    }
    let qs = shapes.iter().map(to_srvf).collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for w in qs.windows(2) {
        total += srvf_distance(&w[0], &w[1], opts)?.distance;
    }
    Ok(total)
}

/// Sum of fully registered distances between consecutive shapes.
pub fn path_energy(shapes: &[ShapeSample], opts: &RegistrationOptions) -> Result<f64> {
    path_energy_with(shapes, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KarcherOptions {
    /// Stop when the mean tangent vector is shorter than this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub step: f64,
    pub registration: RegistrationOptions,
}

impl Default for KarcherOptions {
    fn default() -> Self {
        KarcherOptions { tolerance: 1e-4, max_iterations: 50, step: 0.5, registration: RegistrationOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KarcherMean {
    /// Mean curve at unit length, starting at the origin.
    pub shape: ShapeSample,
    pub q: SrvfCurve,
    pub iterations: usize,
    /// `false` when `max_iterations` ran out; `shape` is then the best
    /// iterate seen.
    pub converged: bool,
    pub tangent_norm: f64,
}

/// Intrinsic (Fréchet) mean of the samples on the SRVF sphere.
///
/// Starts from the sample with least summed distance to the others, then
/// repeatedly registers every sample to the current mean, averages their
/// inverse-exponential lifts and moves along the exponential map.
pub fn karcher_mean(samples: &[ShapeSample], options: &KarcherOptions) -> Result<KarcherMean> {
    let first = samples.first().ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    if let Some(bad) = samples.iter().find(|s| s.n() != first.n()) {
        return Err(Error::LengthMismatch(first.n(), bad.n()));
    }
    let qs = samples.iter().map(to_srvf).collect::<Result<Vec<_>>>()?;
    let n = first.n();

    let mut sums = alloc::vec![0.0; qs.len()];
    for i in 0..qs.len() {
        for j in i + 1..qs.len() {
            let d = srvf_distance(&qs[i], &qs[j], &options.registration)?.distance;
            sums[i] += d;
            sums[j] += d;
        }
    }
    let start = (0..qs.len()).fold(0, |best, i| if sums[i] < sums[best] { i } else { best });
    let mut mean = qs[start].q.clone();
    let mut best = (f64::INFINITY, mean.clone());
    let mut iterations = 0;
    let mut converged = false;
    let mut tangent_norm = f64::INFINITY;
    let id = String::from("karcher_mean");
    let mut one_way = options.registration;
    one_way.both_directions = false;

    while iterations < options.max_iterations {
        let mean_curve = SrvfCurve { id: id.clone(), q: mean.clone() };
        let mut tangent = alloc::vec![Point::ZERO; n];
        for q in &qs {
            let aligned = align(&mean_curve, q, &one_way)?;
            let cos = inner(&mean, &aligned.q).clamp(-1.0, 1.0);
            let theta = arc_distance(&mean, &aligned.q);
            let factor = if theta < 1e-12 { 1.0 } else { theta / theta.sin() };
            for ((t, x), m) in tangent.iter_mut().zip(&aligned.q).zip(&mean) {
                *t += (*x - *m * cos) * (factor / qs.len() as f64);
            }
        }
        tangent_norm = l2_norm(&tangent);
        if tangent_norm < best.0 {
            best = (tangent_norm, mean.clone());
        }
        if tangent_norm < options.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let len = options.step * tangent_norm;
        let (s, c) = len.sin_cos();
        let moved: Vec<Point> =
            mean.iter().zip(&tangent).map(|(m, t)| *m * c + *t * (s * options.step / len)).collect();
        mean = normalized(&moved);
    }
    if !converged {
        mean = best.1;
        tangent_norm = best.0;
    }
    let q = SrvfCurve { id, q: mean };
    let mut shape = srvf_inverse(&q, 1.0, Point::ZERO);
    shape.label = first.label.clone();
    Ok(KarcherMean { shape, q, iterations, converged, tangent_norm })
}
