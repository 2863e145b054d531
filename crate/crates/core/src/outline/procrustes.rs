//! Generalized Procrustes alignment.

use alloc::vec::Vec;

use crate::geometry::{optimal_rotation, Point, Rotation2};
use crate::outline::{normalize_configuration, PreShape, ShapeSample};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcrustesOptions {
    /// Allow improper (reflecting) orthogonal maps. Off by default so that
    /// chirality stays meaningful.
    pub allow_reflection: bool,
    /// Stop once no mean coordinate moves by more than this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ProcrustesOptions {
    fn default() -> Self {
        ProcrustesOptions { allow_reflection: false, tolerance: 1e-10, max_iterations: 100 }
    }
}

/// An orthogonal map of the plane: optional reflection `y ↦ -y`, then a
/// rotation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OrthogonalMap {
    pub rotation: Rotation2,
    pub reflect: bool,
}

impl OrthogonalMap {
    pub fn apply(self, p: Point) -> Point {
        let p = if self.reflect { Point::new(p.x, -p.y) } else { p };
        self.rotation.apply(p)
    }

    /// Best map of `source` onto `target` in the least-squares sense.
    pub fn fit(target: &[Point], source: &[Point], allow_reflection: bool) -> Self {
        let (rotation, score) = optimal_rotation(target, source);
        let proper = OrthogonalMap { rotation, reflect: false };
        if !allow_reflection {
            return proper;
        }
        let mirrored: Vec<Point> = source.iter().map(|p| Point::new(p.x, -p.y)).collect();
        let (mrot, mscore) = optimal_rotation(target, &mirrored);
        if mscore > score {
            OrthogonalMap { rotation: mrot, reflect: true }
        } else {
            proper
        }
    }
}

#[derive(Debug, Clone)]
pub struct GpaResult {
    pub shapes: Vec<PreShape>,
    /// Converged mean, itself a pre-shape (centered, unit size).
    pub mean: Vec<Point>,
    pub iterations: usize,
    pub converged: bool,
}

fn apply_all(points: &[Point], map: OrthogonalMap) -> Vec<Point> {
    points.iter().map(|p| map.apply(*p)).collect()
}

/// Generalized Procrustes analysis.
///
/// Every sample is centered and scaled to unit centroid size, then rotated
/// onto a running mean (initialized to the first sample) until the mean
/// settles. The final configuration is fixed by keeping the first sample in
/// its input orientation, which makes the procedure idempotent.
pub fn generalized_procrustes(samples: &[ShapeSample], options: ProcrustesOptions) -> Result<GpaResult> {
    let first = samples.first().ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    let n = first.n();
    let mut base = Vec::with_capacity(samples.len());
    for s in samples {
        if s.n() != n {
            return Err(Error::MismatchedSizes(n, s.n()));
        }
        base.push(normalize_configuration(&s.points).ok_or_else(|| Error::DegenerateShape(s.id.clone()))?);
    }

    let align_to = |mean: &[Point]| -> Vec<Vec<Point>> {
        base.iter()
            .map(|b| apply_all(b, OrthogonalMap::fit(mean, b, options.allow_reflection)))
            .collect()
    };

    let mut mean = base[0].clone();
    let mut aligned = align_to(&mean);
    let mut iterations = 0;
    let mut converged = samples.len() == 1;
    while !converged && iterations < options.max_iterations {
        iterations += 1;
        let mut next = alloc::vec![Point::ZERO; n];
        for shape in &aligned {
            for (m, p) in next.iter_mut().zip(shape) {
                *m += *p;
            }
        }
        let next = normalize_configuration(&next)
            .ok_or_else(|| Error::DegenerateShape(alloc::string::String::from("mean")))?;
        let change = mean
            .iter()
            .zip(&next)
            .map(|(a, b)| (a.x - b.x).abs().max((a.y - b.y).abs()))
            .fold(0.0, f64::max);
        mean = next;
        aligned = align_to(&mean);
        converged = change < options.tolerance;
    }

    // Gauge: undo whatever rotation the first shape picked up.
    let gauge = OrthogonalMap::fit(&base[0], &aligned[0], options.allow_reflection);
    let shapes = samples
        .iter()
        .zip(&aligned)
        .map(|(s, pts)| PreShape { id: s.id.clone(), label: s.label.clone(), points: apply_all(pts, gauge) })
        .collect();
    Ok(GpaResult { shapes, mean: apply_all(&mean, gauge), iterations, converged })
}

/// Aligns `samples` with [`generalized_procrustes`] and default options.
pub fn procrustes_align(samples: &[ShapeSample]) -> Result<Vec<PreShape>> {
    generalized_procrustes(samples, ProcrustesOptions::default()).map(|r| r.shapes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn sample(id: &str, points: Vec<Point>) -> ShapeSample {
        ShapeSample::new(id, None, points).unwrap()
    }

    fn blob(n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                let r = 1.0 + 0.3 * (3.0 * t).cos() + 0.1 * (t).sin();
                Point::new(r * t.cos() + 2.0, 0.7 * r * t.sin() - 1.0)
            })
            .collect()
    }

    #[test]
    fn rotated_scaled_copy_collapses() {
        let a = blob(40);
        let rot = Rotation2::new(37f64.to_radians());
        let b: Vec<Point> = a.iter().map(|p| rot.apply(*p) * 5.0 + Point::new(3.0, 4.0)).collect();
        let out = procrustes_align(&[sample("a", a), sample("b", b)]).unwrap();
        for (p, q) in out[0].points.iter().zip(&out[1].points) {
            assert!((p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9);
        }
    }

    #[test]
    fn single_sample_is_only_normalized() {
        let a = blob(30);
        let out = procrustes_align(&[sample("a", a.clone())]).unwrap();
        let expected = normalize_configuration(&a).unwrap();
        for (p, q) in out[0].points.iter().zip(&expected) {
            assert!(p.distance(*q) < 1e-15);
        }
    }

    #[test]
    fn mismatched_sizes() {
        let err = procrustes_align(&[sample("a", blob(10)), sample("b", blob(11))]).unwrap_err();
        assert_eq!(err, Error::MismatchedSizes(10, 11));
    }

    #[test]
    fn degenerate_shape() {
        let err = procrustes_align(&[sample("a", blob(10)), sample("z", vec![Point::new(1.0, 1.0); 10])]).unwrap_err();
        assert_eq!(err, Error::DegenerateShape("z".into()));
    }

    #[test]
    fn reflection_only_when_enabled() {
        let a = blob(24);
        let mirrored: Vec<Point> = a.iter().map(|p| Point::new(-p.x, p.y)).collect();
        let samples = [sample("a", a), sample("m", mirrored)];
        let off = generalized_procrustes(&samples, ProcrustesOptions::default()).unwrap();
        let on = generalized_procrustes(&samples, ProcrustesOptions { allow_reflection: true, ..Default::default() })
            .unwrap();
        let gap = |r: &GpaResult| {
            r.shapes[0].points.iter().zip(&r.shapes[1].points).map(|(p, q)| p.distance(*q)).fold(0.0, f64::max)
        };
        assert!(gap(&off) > 1e-2);
        assert!(gap(&on) < 1e-9);
    }
}
