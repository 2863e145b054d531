//! Elastic shape analysis with square-root velocity functions.
//!
//! A closed curve `c` sampled at `N` points is mapped to
//! `q = ċ / √|ċ|`, scaled to unit L² norm. Under this map the elastic metric
//! becomes the L² metric, unit-norm curves live on a sphere, and shape
//! distance is the great-circle angle after optimizing over rotation, start
//! point and reparameterization.

mod geodesic;
pub mod registration;

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::outline::ShapeSample;
use crate::{Error, Result};

pub use geodesic::{geodesic_path, karcher_mean, path_energy, GeodesicPath, KarcherMean, KarcherOptions};
pub use registration::{align, srvf_distance, Alignment, Registration, RegistrationOptions, SeedSearch, SrvfMatch};

/// Square-root velocity representation of a sampled closed curve, scaled to
/// the unit sphere: `Σ|q_i|² / N = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrvfCurve {
    /// Id of the source sample.
    pub id: String,
    pub q: Vec<Point>,
}

/// L² inner product `Σ ⟨a_i, b_i⟩ / N`.
pub fn inner(a: &[Point], b: &[Point]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(*y)).sum::<f64>() / a.len() as f64
}

pub fn l2_norm(q: &[Point]) -> f64 {
    inner(q, q).sqrt()
}

/// `q` rescaled to unit L² norm; zero curves are returned unchanged.
pub fn normalized(q: &[Point]) -> Vec<Point> {
    let norm = l2_norm(q);
    if norm == 0.0 {
        return q.to_vec();
    }
    q.iter().map(|p| *p * (1.0 / norm)).collect()
}

/// Great-circle distance between two unit-norm curves as they stand.
pub fn arc_distance(a: &[Point], b: &[Point]) -> f64 {
    inner(a, b).clamp(-1.0, 1.0).acos()
}

impl SrvfCurve {
    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.q)
    }
}

/// SRVF of the sampled closed curve on the parameter grid `t_i = i / N`.
///
/// The velocity on each sample interval is the forward difference
/// `(c_{i+1} − c_i)·N`, which is the exact derivative of the closed polygon
/// and makes [`srvf_inverse`] an exact inverse. Zero velocities map to zero.
pub fn to_srvf(sample: &ShapeSample) -> Result<SrvfCurve> {
    let c = &sample.points;
    let n = c.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n, 3));
    }
    let scale = n as f64;
    let q: Vec<Point> = (0..n)
        .map(|i| {
            let v = (c[(i + 1) % n] - c[i]) * scale;
            let speed = v.norm();
            if speed == 0.0 {
                Point::ZERO
            } else {
                v * (1.0 / speed.sqrt())
            }
        })
        .collect();
    let norm = l2_norm(&q);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateCurve);
    }
    Ok(SrvfCurve { id: sample.id.clone(), q: q.into_iter().map(|p| p * (1.0 / norm)).collect() })
}

/// Integrates `q|q|` back to a closed curve of length ≈ `scale` starting at
/// `anchor`. Any net displacement is removed linearly so the curve closes.
pub fn srvf_inverse(q: &SrvfCurve, scale: f64, anchor: Point) -> ShapeSample {
    let n = q.n();
    let step = scale / n as f64;
    let velocity: Vec<Point> = q.q.iter().map(|p| *p * (p.norm() * step)).collect();
    let mut drift = Point::ZERO;
    for v in &velocity {
        drift += *v;
    }
    let mut points = Vec::with_capacity(n);
    let mut c = anchor;
    for (i, v) in velocity.iter().enumerate() {
        points.push(c - drift * (i as f64 / n as f64));
        c += *v;
    }
    ShapeSample { id: q.id.clone(), label: None, points }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry;
    use alloc::vec::Vec;
    use core::f64::consts::PI;

    pub fn ellipse(n: usize, a: f64, b: f64) -> ShapeSample {
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                Point::new(a * t.cos(), b * t.sin())
            })
            .collect();
        ShapeSample::new("ellipse", None, pts).unwrap()
    }

    #[test]
    fn circle_has_constant_speed() {
        let q = to_srvf(&ellipse(200, 1.0, 1.0)).unwrap();
        assert!((q.norm() - 1.0).abs() < 1e-9);
        let mags: Vec<f64> = q.q.iter().map(|p| p.norm()).collect();
        let (lo, hi) = mags.iter().fold((f64::MAX, f64::MIN), |(l, h), &m| (l.min(m), h.max(m)));
        assert!(hi - lo < 1e-3);
    }

    #[test]
    fn scale_and_translation_invariant() {
        let s = ellipse(64, 2.0, 1.0);
        let moved = s.map_points(|p| p * 3.7 + Point::new(5.0, -2.0));
        let (a, b) = (to_srvf(&s).unwrap(), to_srvf(&moved).unwrap());
        for (x, y) in a.q.iter().zip(&b.q) {
            assert!(x.distance(*y) < 1e-9);
        }
    }

    #[test]
    fn square_edges_are_orthogonal() {
        let mut pts = Vec::new();
        for side in 0..4 {
            for k in 0..25 {
                let t = k as f64 / 25.0;
                pts.push(match side {
                    0 => Point::new(t, 0.0),
                    1 => Point::new(1.0, t),
                    2 => Point::new(1.0 - t, 1.0),
                    _ => Point::new(0.0, 1.0 - t),
                });
            }
        }
        let q = to_srvf(&ShapeSample::new("sq", None, pts).unwrap()).unwrap();
        // Away from the corners, edge 1 and edge 2 tangents are (1,0) and (0,1).
        for k in 3..22 {
            assert!(q.q[k].dot(q.q[25 + k]).abs() < 1e-12);
            assert!(q.q[k].y.abs() < 1e-12 && q.q[25 + k].x.abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let c = ellipse(120, 2.0, 1.0);
        let q = to_srvf(&c).unwrap();
        let back = srvf_inverse(&q, c.perimeter(), c.points[0]);
        let size = 2.0;
        assert!(geometry::hausdorff_closed(&back.points, &c.points) / size < 1e-3);
        for (a, b) in back.points.iter().zip(&c.points) {
            assert!(a.distance(*b) < 1e-12);
        }
    }

    #[test]
    fn inverse_of_circle_q_with_scale_two_pi() {
        let q = to_srvf(&ellipse(256, 5.0, 5.0)).unwrap();
        let back = srvf_inverse(&q, 2.0 * PI, Point::new(1.0, 0.0));
        let c = geometry::centroid(&back.points);
        for p in &back.points {
            assert!(((*p - c).norm() - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn closed_q_needs_no_drift_correction() {
        let c = ellipse(50, 1.0, 0.4);
        let q = to_srvf(&c).unwrap();
        let mut drift = Point::ZERO;
        for p in &q.q {
            drift += *p * p.norm();
        }
        assert!(drift.norm() < 1e-12);
    }

    #[test]
    fn degenerate_curve() {
        let s = ShapeSample::new("dot", None, alloc::vec![Point::new(1.0, 2.0); 5]).unwrap();
        assert_eq!(to_srvf(&s), Err(Error::DegenerateCurve));
    }
}
