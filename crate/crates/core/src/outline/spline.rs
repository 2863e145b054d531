//! Closed cubic spline with chord-length knots and arc-length resampling.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;

use crate::geometry::{self, Point};
use crate::outline::{Outline, ShapeSample};
use crate::{Error, Result};

// 8-point Gauss–Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Interpolating periodic C² cubic spline through a closed point sequence,
/// parameterized by cumulative chord length.
#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    points: Vec<Point>,
    /// Knot spacing: `h[i]` is the chord from point `i` to `i + 1`.
    h: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<Point>,
    /// Arc length of each segment.
    seg_len: Vec<f64>,
    /// Cumulative arc length at the start of each segment, plus the total.
    cum: Vec<f64>,
}

impl PeriodicSpline {
    pub fn new(points: &[Point]) -> Result<Self> {
        let n = points.len();
        if n < 4 {
            return Err(Error::TooFewPoints(n, 4));
        }
        let h: Vec<f64> = (0..n).map(|i| points[i].distance(points[(i + 1) % n])).collect();
        if h.iter().any(|&d| d == 0.0) {
            return Err(Error::InvalidOutline("repeated consecutive points"));
        }
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs_x = vec![0.0; n];
        let mut rhs_y = vec![0.0; n];
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            sub[i] = h[prev];
            diag[i] = 2.0 * (h[prev] + h[i]);
            sup[i] = h[i];
            let slope_next = (points[next] - points[i]) * (1.0 / h[i]);
            let slope_prev = (points[i] - points[prev]) * (1.0 / h[prev]);
            let r = (slope_next - slope_prev) * 6.0;
            rhs_x[i] = r.x;
            rhs_y[i] = r.y;
        }
        let mx = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs_x);
        let my = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs_y);
        let m: Vec<Point> = mx.into_iter().zip(my).map(|(x, y)| Point::new(x, y)).collect();

        let mut spline = PeriodicSpline { points: points.to_vec(), h, m, seg_len: vec![], cum: vec![] };
        spline.seg_len = (0..n).map(|i| spline.arc_within(i, spline.h[i])).collect();
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for len in &spline.seg_len {
            acc += len;
            cum.push(acc);
        }
        spline.cum = cum;
        Ok(spline)
    }

    pub fn segments(&self) -> usize {
        self.points.len()
    }

    /// Total arc length of the closed curve.
    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Position on segment `i` at local parameter `u ∈ [0, h_i]`.
    pub fn eval(&self, i: usize, u: f64) -> Point {
        let n = self.points.len();
        let j = (i + 1) % n;
        let h = self.h[i];
        let (a, b) = (h - u, u);
        let (mi, mj) = (self.m[i], self.m[j]);
        mi * (a * a * a / (6.0 * h))
            + mj * (b * b * b / (6.0 * h))
            + (self.points[i] * (1.0 / h) - mi * (h / 6.0)) * a
            + (self.points[j] * (1.0 / h) - mj * (h / 6.0)) * b
    }

    /// Derivative with respect to the chord-length parameter.
    pub fn derivative(&self, i: usize, u: f64) -> Point {
        let n = self.points.len();
        let j = (i + 1) % n;
        let h = self.h[i];
        let (a, b) = (h - u, u);
        let (mi, mj) = (self.m[i], self.m[j]);
        mi * (-a * a / (2.0 * h)) + mj * (b * b / (2.0 * h)) - (self.points[i] * (1.0 / h) - mi * (h / 6.0))
            + (self.points[j] * (1.0 / h) - mj * (h / 6.0))
    }

    /// Arc length along segment `i` from its start to local parameter `u`.
    fn arc_within(&self, i: usize, u: f64) -> f64 {
        // Two Gauss–Legendre panels per evaluation.
        let half = 0.5 * u;
        let mut total = 0.0;
        for panel in 0..2 {
            let lo = panel as f64 * half;
            let mid = lo + 0.5 * half;
            for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
                total += w * self.derivative(i, mid + 0.5 * half * x).norm();
            }
        }
        total * 0.5 * half
    }

    /// Point at arc length `s ∈ [0, length)` from the first knot.
    pub fn point_at_arc_length(&self, s: f64) -> Point {
        let n = self.points.len();
        let total = self.length();
        let s = s - total * (s / total).floor();
        let i = match self.cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(k) => k.min(n - 1),
            Err(k) => k - 1,
        };
        let target = s - self.cum[i];
        if target <= 0.0 {
            return self.points[i];
        }
        let h = self.h[i];
        let (mut lo, mut hi) = (0.0, h);
        let mut u = h * (target / self.seg_len[i]).min(1.0);
        let tol = 1e-14 * self.length().max(1.0);
        for _ in 0..100 {
            let f = self.arc_within(i, u) - target;
            if f.abs() <= tol {
                break;
            }
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let speed = self.derivative(i, u).norm();
            let newton = u - f / speed;
            u = if speed > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * h {
                break;
            }
        }
        self.eval(i, u)
    }
}

/// Solves a cyclic tridiagonal system by the Sherman–Morrison correction.
/// Row `i` reads `sub[i]·x[i-1] + diag[i]·x[i] + sup[i]·x[i+1] = rhs[i]`,
/// indices taken modulo `n`.
fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &b, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &b, sup, &u);
    let factor = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Resamples `outline` to `n` points at equal arc-length steps along its
/// periodic spline, starting at the outline's first point. The result is
/// turned counter-clockwise when needed, keeping the first point in place.
pub fn resample(outline: &Outline, n: usize) -> Result<ShapeSample> {
    if n < 8 {
        return Err(Error::ConfigOutOfRange("resample needs n >= 8"));
    }
    let spline = PeriodicSpline::new(outline.points())?;
    let step = spline.length() / n as f64;
    let points: Vec<Point> = (0..n).map(|k| spline.point_at_arc_length(k as f64 * step)).collect();
    let sample = ShapeSample { id: outline.id.clone(), label: outline.label.clone(), points };
    if geometry::signed_area(&sample.points) < 0.0 {
        Ok(sample.reversed())
    } else {
        Ok(sample)
    }
}
