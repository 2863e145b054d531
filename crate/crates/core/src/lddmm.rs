//! Landmark LDDMM with per-timestep momenta.
//!
//! Points flow by forward Euler under the velocity `v_i = Σ_j K(x_i, x_j) p_j`
//! with a Gaussian kernel. The objective is kinetic energy plus `λ` times the
//! squared endpoint mismatch; gradients come from a hand-written adjoint
//! sweep backwards through the Euler steps.
//!
//! Both shapes are scaled by the same factor so the source has unit RMS
//! radius; `kernel_width`, `distance` and `residual` are in those units.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::classify::DistanceMatrix;
use crate::geometry::{self, Point};
use crate::outline::{PreShape, ShapeSample};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LddmmConfig {
    pub kernel_width: f64,
    /// Weight of the endpoint mismatch.
    pub lambda: f64,
    pub timesteps: usize,
    pub max_iters: usize,
    /// Stop once the gradient norm falls below this.
    pub grad_tol: f64,
}

impl Default for LddmmConfig {
    fn default() -> Self {
        LddmmConfig { kernel_width: 0.5, lambda: 10.0, timesteps: 20, max_iters: 200, grad_tol: 1e-6 }
    }
}

impl LddmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kernel_width > 0.0 && self.kernel_width.is_finite()) {
            return Err(Error::ConfigOutOfRange("kernel width must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::ConfigOutOfRange("lambda must be positive"));
        }
        if self.timesteps < 2 {
            return Err(Error::ConfigOutOfRange("timesteps must be at least 2"));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::ConfigOutOfRange("gradient tolerance must be non-negative"));
        }
        Ok(())
    }

    pub fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        p.insert(String::from("kernel_width"), format!("{}", self.kernel_width));
        p.insert(String::from("lambda"), format!("{}", self.lambda));
        p.insert(String::from("timesteps"), format!("{}", self.timesteps));
        p.insert(String::from("max_iters"), format!("{}", self.max_iters));
        p.insert(String::from("grad_tol"), format!("{}", self.grad_tol));
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Square root of the kinetic energy.
    pub distance: f64,
    /// Endpoint mismatch norm `‖x_T - dst‖`.
    pub residual: f64,
    /// `timesteps` rows of `N` momenta, in normalized units.
    pub momenta: Vec<Vec<Point>>,
    /// Source flowed to the final time, in the caller's units.
    pub deformed: ShapeSample,
    /// False when the iteration budget ran out first; the result is then the best iterate.
    pub converged: bool,
    pub iterations: usize,
    /// Objective after each accepted step, starting from zero momenta.
    pub energies: Vec<f64>,
}

/// Objective split into its two terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub mismatch: f64,
    pub total: f64,
}

/// The matching problem in normalized coordinates. `momenta` is flat,
/// timestep-major: `p[t·N + i]`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub source: Vec<Point>,
    pub target: Vec<Point>,
    pub config: LddmmConfig,
}

impl Problem {
    pub fn new(source: Vec<Point>, target: Vec<Point>, config: LddmmConfig) -> Result<Self> {
        config.validate()?;
        if source.len() != target.len() {
            return Err(Error::LengthMismatch(source.len(), target.len()));
        }
        if source.is_empty() {
            return Err(Error::TooFewPoints(0, 1));
        }
        Ok(Problem { source, target, config })
    }

    pub fn n(&self) -> usize {
        self.source.len()
    }

    pub fn parameter_len(&self) -> usize {
        self.n() * self.config.timesteps
    }

    fn kernel(&self, a: Point, b: Point) -> f64 {
        let w = self.config.kernel_width;
        (-(a - b).norm_sq() / (2.0 * w * w)).exp()
    }

    /// Flows the source forward; returns every state `x_0..=x_T`.
    pub fn shoot(&self, momenta: &[Point]) -> Vec<Vec<Point>> {
        let (n, steps) = (self.n(), self.config.timesteps);
        let dt = 1.0 / steps as f64;
        let mut states = Vec::with_capacity(steps + 1);
        states.push(self.source.clone());
        for t in 0..steps {
            let x = &states[t];
            let p = &momenta[t * n..(t + 1) * n];
            let v = self.velocity(x, p);
            let next = x.iter().zip(&v).map(|(xi, vi)| *xi + *vi * dt).collect();
            states.push(next);
        }
        states
    }

    fn velocity(&self, x: &[Point], p: &[Point]) -> Vec<Point> {
        x.iter()
            .map(|xi| x.iter().zip(p).fold(Point::ZERO, |acc, (xj, pj)| acc + *pj * self.kernel(*xi, *xj)))
            .collect()
    }

    pub fn energy(&self, momenta: &[Point]) -> Energy {
        let (n, steps) = (self.n(), self.config.timesteps);
        let dt = 1.0 / steps as f64;
        let states = self.shoot(momenta);
        let mut kinetic = 0.0;
        for t in 0..steps {
            let p = &momenta[t * n..(t + 1) * n];
            let v = self.velocity(&states[t], p);
            kinetic += dt * p.iter().zip(&v).map(|(a, b)| a.dot(*b)).sum::<f64>();
        }
        let mismatch = mismatch_sq(&states[steps], &self.target);
        Energy { kinetic, mismatch, total: kinetic + self.config.lambda * mismatch }
    }

    /// Objective and its gradient with respect to every momentum.
    pub fn energy_and_gradient(&self, momenta: &[Point]) -> (Energy, Vec<Point>) {
        let (n, steps) = (self.n(), self.config.timesteps);
        let dt = 1.0 / steps as f64;
        let w2 = self.config.kernel_width * self.config.kernel_width;
        let states = self.shoot(momenta);

        let mut kinetic = 0.0;
        let mut grad = vec![Point::ZERO; n * steps];
        let x_end = &states[steps];
        let mismatch = mismatch_sq(x_end, &self.target);
        // a = dE/dx at the current time, starting from the endpoint term.
        let mut adj: Vec<Point> =
            x_end.iter().zip(&self.target).map(|(x, y)| (*x - *y) * (2.0 * self.config.lambda)).collect();
        let mut k = vec![0.0; n * n];
        for t in (0..steps).rev() {
            let x = &states[t];
            let p = &momenta[t * n..(t + 1) * n];
            for i in 0..n {
                k[i * n + i] = 1.0;
                for j in i + 1..n {
                    let v = self.kernel(x[i], x[j]);
                    k[i * n + j] = v;
                    k[j * n + i] = v;
                }
            }
            let mut next_adj = adj.clone();
            for i in 0..n {
                let mut v = Point::ZERO;
                let mut ka = Point::ZERO;
                for j in 0..n {
                    v += p[j] * k[i * n + j];
                    ka += adj[j] * k[i * n + j];
                }
                kinetic += dt * p[i].dot(v);
                grad[t * n + i] = (v * 2.0 + ka) * dt;

                let mut dx = Point::ZERO;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let coeff = adj[i].dot(p[j]) + adj[j].dot(p[i]) + 2.0 * p[i].dot(p[j]);
                    let g = (x[i] - x[j]) * (-k[i * n + j] / w2);
                    dx += g * coeff;
                }
                next_adj[i] += dx * dt;
            }
            adj = next_adj;
        }
        let energy = Energy { kinetic, mismatch, total: kinetic + self.config.lambda * mismatch };
        (energy, grad)
    }
}

fn mismatch_sq(a: &[Point], b: &[Point]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x - *y).norm_sq()).sum()
}

fn rms_radius(points: &[Point]) -> f64 {
    geometry::centroid_size(points) / (points.len() as f64).sqrt()
}

/// Minimizes the objective by gradient descent with Armijo backtracking,
/// starting from zero momenta.
pub fn lddmm_match(src: &ShapeSample, dst: &ShapeSample, config: &LddmmConfig) -> Result<MatchResult> {
    config.validate()?;
    if src.n() != dst.n() {
        return Err(Error::LengthMismatch(src.n(), dst.n()));
    }
    let scale = rms_radius(&src.points);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::DegenerateShape(src.id.clone()));
    }
    let problem = Problem::new(
        src.points.iter().map(|p| *p * (1.0 / scale)).collect(),
        dst.points.iter().map(|p| *p * (1.0 / scale)).collect(),
        *config,
    )?;

    const ARMIJO_C: f64 = 1e-4;
    const MAX_BACKTRACKS: usize = 60;

    let mut momenta = vec![Point::ZERO; problem.parameter_len()];
    let (mut energy, mut grad) = problem.energy_and_gradient(&momenta);
    if !energy.total.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    let mut energies = vec![energy.total];
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        let g2: f64 = grad.iter().map(|g| g.norm_sq()).sum();
        if g2.sqrt() <= config.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<Point> = momenta.iter().zip(&grad).map(|(p, g)| *p - *g * step).collect();
            let e = problem.energy(&trial).total;
            if e.is_finite() && e <= energy.total - ARMIJO_C * step * g2 {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(trial) = accepted else {
            // No descent step exists at machine precision: a stationary point.
            converged = true;
            break;
        };
        momenta = trial;
        (energy, grad) = problem.energy_and_gradient(&momenta);
        if !energy.total.is_finite() {
            return Err(Error::NonFiniteEnergy);
        }
        energies.push(energy.total);
        step *= 2.0;
    }
    if !converged {
        let g2: f64 = grad.iter().map(|g| g.norm_sq()).sum();
        converged = g2.sqrt() <= config.grad_tol;
    }

    let states = problem.shoot(&momenta);
    let n = problem.n();
    let deformed = ShapeSample {
        id: src.id.clone(),
        label: src.label.clone(),
        points: states[config.timesteps].iter().map(|p| *p * scale).collect(),
    };
    let distance = energy.kinetic.max(0.0).sqrt();
    let residual = energy.mismatch.sqrt();
    if !distance.is_finite() || !residual.is_finite() {
        return Err(Error::NonFiniteEnergy);
    }
    Ok(MatchResult {
        distance,
        residual,
        momenta: momenta.chunks(n).map(|c| c.to_vec()).collect(),
        deformed,
        converged,
        iterations,
        energies,
    })
}

/// Symmetrized cell value: the mean of both matching directions.
pub fn lddmm_pair_distance(a: &ShapeSample, b: &ShapeSample, config: &LddmmConfig) -> Result<f64> {
    let ab = lddmm_match(a, b, config)?;
    let ba = lddmm_match(b, a, config)?;
    Ok(0.5 * (ab.distance + ba.distance))
}

pub fn lddmm_distances(samples: &[PreShape], config: &LddmmConfig) -> Result<DistanceMatrix> {
    config.validate()?;
    if let Some(first) = samples.first() {
        if let Some(bad) = samples.iter().find(|s| s.n() != first.n()) {
            return Err(Error::LengthMismatch(first.n(), bad.n()));
        }
    }
    let shapes: Vec<ShapeSample> = samples.iter().map(PreShape::to_sample).collect();
    let ids = samples.iter().map(|s| s.id.clone()).collect();
    DistanceMatrix::from_fn(ids, "lddmm", config.params(), |i, j| lddmm_pair_distance(&shapes[i], &shapes[j], config))
}
