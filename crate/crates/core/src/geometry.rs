//! Planar points and closed-polygon helpers shared by every module.

use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// A point (or vector) in the plane. Serializes as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ZERO: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point {
    #[inline]
    fn add_assign(&mut self, o: Point) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Point {
    #[inline]
    fn sub_assign(&mut self, o: Point) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// A proper rotation of the plane, stored by its angle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rotation2 {
    pub angle: f64,
}

impl Rotation2 {
    pub const IDENTITY: Rotation2 = Rotation2 { angle: 0.0 };

    pub fn new(angle: f64) -> Self {
        Rotation2 { angle }
    }

    #[inline]
    pub fn apply(self, p: Point) -> Point {
        let (s, c) = self.angle.sin_cos();
        Point::new(c * p.x - s * p.y, s * p.x + c * p.y)
    }

    /// Row-major 2×2 matrix.
    pub fn matrix(self) -> [[f64; 2]; 2] {
        let (s, c) = self.angle.sin_cos();
        [[c, -s], [s, c]]
    }

    pub fn inverse(self) -> Self {
        Rotation2::new(-self.angle)
    }

    pub fn compose(self, other: Rotation2) -> Self {
        Rotation2::new(self.angle + other.angle)
    }
}

/// Rotation `R` maximizing `Σ w_i ⟨target_i, R·source_i⟩` together with the
/// attained value.
///
/// This is the 2×2 orthogonal Procrustes problem restricted to det = +1. For
/// the cross-covariance `M = Σ target_i source_iᵀ` the SVD solution reduces to
/// `θ = atan2(M₁₀ − M₀₁, M₀₀ + M₁₁)`, and the maximum is the magnitude of
/// that vector.
pub fn optimal_rotation(target: &[Point], source: &[Point]) -> (Rotation2, f64) {
    let (mut dot, mut cross) = (0.0, 0.0);
    for (t, s) in target.iter().zip(source) {
        dot += t.dot(*s);
        cross += s.cross(*t);
    }
    (Rotation2::new(cross.atan2(dot)), (dot * dot + cross * cross).sqrt())
}

/// Shoelace signed area of the closed polygon; positive when
/// counter-clockwise.
pub fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += points[i].cross(points[(i + 1) % n]);
    }
    0.5 * acc
}

/// Length of the closed polygon, including the closing edge.
pub fn perimeter(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    (0..n).map(|i| points[i].distance(points[(i + 1) % n])).sum()
}

/// Length of the open polyline.
pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Arithmetic mean of the points.
pub fn centroid(points: &[Point]) -> Point {
    if points.is_empty() {
        return Point::ZERO;
    }
    let mut c = Point::ZERO;
    for p in points {
        c += *p;
    }
    c * (1.0 / points.len() as f64)
}

/// Root-sum-of-squares distance of the points from their centroid.
pub fn centroid_size(points: &[Point]) -> f64 {
    let c = centroid(points);
    points.iter().map(|p| (*p - c).norm_sq()).sum::<f64>().sqrt()
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn directed_polygon_distance(from: &[Point], to: &[Point]) -> f64 {
    let n = to.len();
    from.iter()
        .map(|p| {
            (0..n)
                .map(|i| point_segment_distance(*p, to[i], to[(i + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between the vertex sets of two closed
/// polygons, each vertex measured against the other polygon's edges.
pub fn hausdorff_closed(a: &[Point], b: &[Point]) -> f64 {
    directed_polygon_distance(a, b).max(directed_polygon_distance(b, a))
}

/// Rotates the slice left by `shift`, so index `shift` becomes index 0.
pub fn cyclic_shift<T: Copy>(values: &[T], shift: usize) -> alloc::vec::Vec<T> {
    let n = values.len();
    (0..n).map(|i| values[(i + shift) % n]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use core::f64::consts::PI;

    fn unit_square() -> Vec<Point> {
        [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
            .iter()
            .map(|&(x, y)| Point::new(x, y))
            .collect()
    }

    #[test]
    fn square_area_perimeter() {
        let sq = unit_square();
        assert_eq!(signed_area(&sq), 1.0);
        assert_eq!(perimeter(&sq), 4.0);
        let rev: Vec<Point> = sq.iter().rev().copied().collect();
        assert_eq!(signed_area(&rev), -1.0);
    }

    #[test]
    fn optimal_rotation_recovers_angle() {
        let sq: Vec<Point> = unit_square().iter().map(|p| *p - Point::new(0.5, 0.3)).collect();
        let rot = Rotation2::new(0.7);
        let moved: Vec<Point> = sq.iter().map(|p| rot.apply(*p)).collect();
        let (found, _) = optimal_rotation(&moved, &sq);
        assert!((found.angle - 0.7).abs() < 1e-12);
        let (back, _) = optimal_rotation(&sq, &moved);
        assert!((back.angle + 0.7).abs() < 1e-12);
    }

    #[test]
    fn rotation_matrix_matches_apply() {
        let r = Rotation2::new(PI / 3.0);
        let m = r.matrix();
        let p = Point::new(0.3, -1.2);
        let q = r.apply(p);
        assert!((q.x - (m[0][0] * p.x + m[0][1] * p.y)).abs() < 1e-15);
        assert!((q.y - (m[1][0] * p.x + m[1][1] * p.y)).abs() < 1e-15);
    }

    #[test]
    fn hausdorff_of_same_polygon_is_zero() {
        let sq = unit_square();
        let shifted = cyclic_shift(&sq, 2);
        assert_eq!(hausdorff_closed(&sq, &shifted), 0.0);
        let bigger: Vec<Point> = sq.iter().map(|p| *p * 2.0).collect();
        assert!((hausdorff_closed(&sq, &bigger) - 2.0f64.sqrt()).abs() < 1e-12);
    }
}
