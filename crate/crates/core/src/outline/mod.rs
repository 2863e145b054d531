//! Outline ingestion: contour extraction, symmetrization, resampling and
//! generalized Procrustes alignment.

mod contour;
mod procrustes;
mod spline;
mod symmetry;

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::geometry::{self, Point};
use crate::{Error, Result};

pub use contour::{extract_contour, Raster};
pub use procrustes::{
    generalized_procrustes, procrustes_align, GpaResult, OrthogonalMap, ProcrustesOptions,
};
pub use spline::{resample, PeriodicSpline};
pub use symmetry::symmetrize_vertical;

/// Default semi-landmark counts of the three reference datasets.
pub const VASE_POINTS: usize = 139;
pub const SHELL_POINTS: usize = 150;
pub const LEAF_POINTS: usize = 200;

/// A raw closed polyline. The closing edge is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outline {
    pub id: String,
    pub label: Option<String>,
    points: Vec<Point>,
}

impl Outline {
    /// Builds an outline, dropping repeated consecutive points and a
    /// duplicated closing point.
    pub fn new(id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidOutline("non-finite coordinate"));
        }
        let mut cleaned: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            if cleaned.last() != Some(&p) {
                cleaned.push(p);
            }
        }
        while cleaned.len() > 1 && cleaned.first() == cleaned.last() {
            cleaned.pop();
        }
        if cleaned.len() < 3 {
            return Err(Error::TooFewPoints(cleaned.len(), 3));
        }
        Ok(Outline { id: id.into(), label: None, points: cleaned })
    }

    pub fn with_label(mut self, label: Option<String>) -> Self {
        self.label = label;
        self
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        geometry::perimeter(&self.points)
    }

    pub fn signed_area(&self) -> f64 {
        geometry::signed_area(&self.points)
    }

    /// Re-checks the invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        Outline::new(self.id.clone(), self.points.clone()).and_then(|o| {
            if o.points.len() == self.points.len() {
                Ok(())
            } else {
                Err(Error::InvalidOutline("repeated consecutive points"))
            }
        })
    }
}

/// `n` points spaced equally by arc length along a closed curve, oriented
/// counter-clockwise. This is the exchange type between every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSample {
    pub id: String,
    pub label: Option<String>,
    pub points: Vec<Point>,
}

impl ShapeSample {
    /// Wraps already-resampled points. Only size and finiteness are checked;
    /// use [`resample`] to produce equally spaced samples.
    pub fn new(id: impl Into<String>, label: Option<String>, points: Vec<Point>) -> Result<Self> {
        let s = ShapeSample { id: id.into(), label, points };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 3 {
            return Err(Error::TooFewPoints(self.points.len(), 3));
        }
        if self.points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidOutline("non-finite coordinate"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn perimeter(&self) -> f64 {
        geometry::perimeter(&self.points)
    }

    pub fn signed_area(&self) -> f64 {
        geometry::signed_area(&self.points)
    }

    /// Same shape with `f` applied to every point.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> ShapeSample {
        ShapeSample {
            id: self.id.clone(),
            label: self.label.clone(),
            points: self.points.iter().map(|p| f(*p)).collect(),
        }
    }

    /// Same curve starting at index `shift`.
    pub fn shifted_start(&self, shift: usize) -> ShapeSample {
        ShapeSample {
            id: self.id.clone(),
            label: self.label.clone(),
            points: geometry::cyclic_shift(&self.points, shift),
        }
    }

    /// Same curve traversed clockwise, keeping the first point.
    pub fn reversed(&self) -> ShapeSample {
        let n = self.points.len();
        let points = (0..n).map(|i| self.points[(n - i) % n]).collect();
        ShapeSample { id: self.id.clone(), label: self.label.clone(), points }
    }
}

impl From<ShapeSample> for Outline {
    fn from(s: ShapeSample) -> Self {
        Outline { id: s.id, label: s.label, points: s.points }
    }
}

/// A configuration with translation and scale removed: centroid at the
/// origin and unit centroid size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreShape {
    /// Id of the source [`ShapeSample`].
    pub id: String,
    pub label: Option<String>,
    pub points: Vec<Point>,
}

impl PreShape {
    /// Centers and scales `sample` without rotating it.
    pub fn from_sample(sample: &ShapeSample) -> Result<Self> {
        let points = normalize_configuration(&sample.points)
            .ok_or_else(|| Error::DegenerateShape(sample.id.clone()))?;
        Ok(PreShape { id: sample.id.clone(), label: sample.label.clone(), points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Interleaved coordinate vector `(x1, y1, …, xN, yN)`.
    pub fn to_vector(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| [p.x, p.y]).collect()
    }

    /// Reinterprets a pre-shape as a shape sample, e.g. to feed SRVF.
    pub fn to_sample(&self) -> ShapeSample {
        ShapeSample { id: self.id.clone(), label: self.label.clone(), points: self.points.clone() }
    }
}

/// Centers `points` and scales them to unit centroid size; `None` when all
/// points coincide.
pub(crate) fn normalize_configuration(points: &[Point]) -> Option<Vec<Point>> {
    let c = geometry::centroid(points);
    let centered: Vec<Point> = points.iter().map(|p| *p - c).collect();
    let size = centered.iter().map(|p| p.norm_sq()).sum::<f64>().sqrt();
    if size == 0.0 || !size.is_finite() {
        return None;
    }
    Some(centered.into_iter().map(|p| p * (1.0 / size)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn outline_drops_closing_duplicate() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(0.0, 0.0),
        ];
        let o = Outline::new("t", pts).unwrap();
        assert_eq!(o.len(), 3);
        assert!(o.validate().is_ok());
    }

    #[test]
    fn outline_needs_three_points() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 0.0)];
        assert_eq!(Outline::new("t", pts), Err(Error::TooFewPoints(2, 3)));
    }

    #[test]
    fn reversed_keeps_first_point() {
        let s = ShapeSample::new(
            "s",
            None,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)],
        )
        .unwrap();
        let r = s.reversed();
        assert_eq!(r.points[0], s.points[0]);
        assert_eq!(r.points[1], s.points[3]);
        assert!((r.signed_area() + s.signed_area()).abs() < 1e-15);
    }

    #[test]
    fn preshape_is_centered_and_unit() {
        let s = ShapeSample::new(
            "s",
            None,
            vec![Point::new(2.0, 3.0), Point::new(7.0, 3.0), Point::new(7.0, 9.0), Point::new(2.0, 8.0)],
        )
        .unwrap();
        let p = PreShape::from_sample(&s).unwrap();
        let c = geometry::centroid(&p.points);
        assert!(c.norm() < 1e-12);
        let size: f64 = p.points.iter().map(|q| q.norm_sq()).sum::<f64>();
        assert!((size - 1.0).abs() < 1e-12);
    }

    #[test]
    fn preshape_rejects_collapsed_points() {
        let s = ShapeSample::new("dot", None, vec![Point::new(1.0, 1.0); 4]).unwrap();
        assert_eq!(PreShape::from_sample(&s), Err(Error::DegenerateShape("dot".into())));
    }
}
