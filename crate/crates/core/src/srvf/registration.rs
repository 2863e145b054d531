//! Registration of one SRVF onto another over start point, rotation and
//! reparameterization.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on newer toolchains
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{arc_distance, inner, normalized, SrvfCurve};
use crate::geometry::{cyclic_shift, optimal_rotation, Point, Rotation2};
use crate::{Error, Result};

/// Which start-point shifts are tried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSearch {
    /// Only the given start point.
    Fixed,
    /// `⌈N/8⌉` evenly spaced shifts, then hill-climbing in ±2 steps around
    /// the best one until it stops moving.
    Coarse,
    /// Every shift.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegistrationOptions {
    pub seeds: SeedSearch,
    pub rotation: bool,
    pub warp: bool,
    /// Cap on rotation ↔ warp alternation rounds; the alternation stops
    /// earlier once a round no longer lowers the distance.
    pub rounds: usize,
    /// Register in both directions and keep the smaller distance.
    pub both_directions: bool,
}

impl Default for RegistrationOptions {
    fn default() -> Self {
        RegistrationOptions { seeds: SeedSearch::Coarse, rotation: true, warp: true, rounds: 20, both_directions: true }
    }
}

impl RegistrationOptions {
    /// Compare curves exactly as they are.
    pub fn none() -> Self {
        RegistrationOptions { seeds: SeedSearch::Fixed, rotation: false, warp: false, rounds: 0, both_directions: false }
    }

    pub fn exhaustive() -> Self {
        RegistrationOptions { seeds: SeedSearch::All, ..Default::default() }
    }
}

/// The alignment found for a source curve: cyclic start shift, then
/// rotation, then warp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registration {
    pub rotation: Rotation2,
    pub seed_shift: usize,
    /// `γ(i / N)` for `i = 0..=N`; non-decreasing from 0 to 1.
    pub warp: Vec<f64>,
}

impl Registration {
    pub fn identity(n: usize) -> Self {
        Registration { rotation: Rotation2::IDENTITY, seed_shift: 0, warp: identity_warp(n) }
    }
}

/// A source curve registered onto a target.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    /// Registered source, rescaled to unit norm.
    pub q: Vec<Point>,
    pub registration: Registration,
    pub distance: f64,
}

/// Result of [`srvf_distance`].
#[derive(Debug, Clone, PartialEq)]
pub struct SrvfMatch {
    pub distance: f64,
    pub registration: Registration,
    /// `false`: the registration maps `b` onto `a`. `true`: the reverse
    /// direction won and it maps `a` onto `b`.
    pub reversed: bool,
}

pub fn identity_warp(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

/// Slopes allowed in the warping grid, as (target steps, source steps).
/// Together they cover slopes between 1/3 and 3.
const STEPS: [(usize, usize); 7] = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];

/// Linear interpolation of the periodic sequence at fractional index `u`.
#[inline]
fn sample_periodic(q: &[Point], u: f64) -> Point {
    let n = q.len();
    let base = u.floor();
    let frac = u - base;
    let i = (base as usize) % n;
    if frac == 0.0 {
        q[i]
    } else {
        q[i].lerp(q[(i + 1) % n], frac)
    }
}

/// Optimal warp of `source` onto `target` by dynamic programming on the
/// `(N+1) × (N+1)` grid, minimizing `Σ |target(t) − √γ'(t)·source(γ(t))|²`
/// over piecewise-linear paths from `(0,0)` to `(N,N)` built from [`STEPS`].
pub fn optimal_warp(target: &[Point], source: &[Point]) -> Vec<f64> {
    let n = target.len();
    let side = n + 1;
    let mut cost = vec![f64::INFINITY; side * side];
    let mut from = vec![u8::MAX; side * side];
    cost[0] = 0.0;
    // Every step samples the source at multiples of 1/6.
    let fine: Vec<Point> = (0..6 * n).map(|m| sample_periodic(source, m as f64 / 6.0)).collect();
    let roots: Vec<f64> = STEPS.iter().map(|&(di, dj)| (dj as f64 / di as f64).sqrt()).collect();
    for i in 1..side {
        for j in 1..side {
            let mut best = f64::INFINITY;
            let mut best_step = u8::MAX;
            for (s, &(di, dj)) in STEPS.iter().enumerate() {
                if di > i || dj > j {
                    continue;
                }
                let (k, l) = (i - di, j - dj);
                let start = cost[k * side + l];
                if !start.is_finite() {
                    continue;
                }
                let root = roots[s];
                let stride = 6 * dj / di;
                let mut edge = 0.0;
                for r in 0..di {
                    let v = fine[(6 * l + stride * r) % (6 * n)] * root;
                    edge += (target[k + r] - v).norm_sq();
                }
                let total = start + edge;
                if total < best {
                    best = total;
                    best_step = s as u8;
                }
            }
            cost[i * side + j] = best;
            from[i * side + j] = best_step;
        }
    }

    let mut warp = vec![0.0; side];
    let (mut i, mut j) = (n, n);
    warp[n] = 1.0;
    while i > 0 {
        let (di, dj) = STEPS[from[i * side + j] as usize];
        let (k, l) = (i - di, j - dj);
        for r in 0..di {
            warp[k + r] = (l as f64 + dj as f64 * r as f64 / di as f64) / n as f64;
        }
        i = k;
        j = l;
    }
    warp
}

/// `(q ∘ γ)·√γ'` on the grid, with `γ'` taken on each right-hand interval.
pub fn apply_warp(q: &[Point], warp: &[f64]) -> Vec<Point> {
    let n = q.len();
    (0..n)
        .map(|i| {
            let slope = ((warp[i + 1] - warp[i]) * n as f64).max(0.0);
            sample_periodic(q, warp[i] * n as f64) * slope.sqrt()
        })
        .collect()
}

fn rotate_all(q: &[Point], r: Rotation2) -> Vec<Point> {
    q.iter().map(|p| r.apply(*p)).collect()
}

/// Best rotation/warp for one start shift of the source.
fn align_seed(target: &[Point], source: &[Point], seed: usize, opts: &RegistrationOptions) -> Alignment {
    let n = target.len();
    let shifted = cyclic_shift(source, seed);
    let rot = |q: &[Point]| if opts.rotation { optimal_rotation(target, q).0 } else { Rotation2::IDENTITY };
    let mut rotation = rot(&shifted);
    let first = normalized(&rotate_all(&shifted, rotation));
    let mut best = Alignment {
        distance: arc_distance(target, &first),
        q: first,
        registration: Registration { rotation, seed_shift: seed, warp: identity_warp(n) },
    };
    if !opts.warp {
        return best;
    }
    for _ in 0..opts.rounds {
        let warp = optimal_warp(target, &rotate_all(&shifted, rotation));
        let warped = apply_warp(&shifted, &warp);
        rotation = rot(&warped);
        let q = normalized(&rotate_all(&warped, rotation));
        let distance = arc_distance(target, &q);
        if distance >= best.distance - 1e-12 {
            break;
        }
        best = Alignment { q, distance, registration: Registration { rotation, seed_shift: seed, warp } };
    }
    best
}

/// Registers `source` onto `target` in one direction.
pub fn align(target: &SrvfCurve, source: &SrvfCurve, opts: &RegistrationOptions) -> Result<Alignment> {
    let n = target.n();
    if source.n() != n {
        return Err(Error::LengthMismatch(n, source.n()));
    }
    let (t, s) = (&target.q[..], &source.q[..]);
    let mut tried: BTreeMap<usize, Alignment> = BTreeMap::new();
    let attempt = |seed: usize, tried: &mut BTreeMap<usize, Alignment>| -> f64 {
        tried.entry(seed).or_insert_with(|| align_seed(t, s, seed, opts)).distance
    };
    match opts.seeds {
        SeedSearch::Fixed => {
            attempt(0, &mut tried);
        }
        SeedSearch::All => {
            for seed in 0..n {
                attempt(seed, &mut tried);
            }
        }
        SeedSearch::Coarse => {
            let count = n.div_ceil(8);
            for k in 0..count {
                attempt(k * n / count, &mut tried);
            }
            let mut center = best_seed(&tried);
            loop {
                for offset in [1, 2, n - 1, n - 2] {
                    attempt((center + offset) % n, &mut tried);
                }
                let next = best_seed(&tried);
                if next == center {
                    break;
                }
                center = next;
            }
        }
    }
    let seed = best_seed(&tried);
    Ok(tried.remove(&seed).unwrap())
}

fn best_seed(tried: &BTreeMap<usize, Alignment>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (&seed, a) in tried {
        if best.map_or(true, |(_, d)| a.distance < d) {
            best = Some((seed, a.distance));
        }
    }
    best.unwrap().0
}

/// Elastic shape distance in `[0, π]` between two SRVFs.
pub fn srvf_distance(a: &SrvfCurve, b: &SrvfCurve, opts: &RegistrationOptions) -> Result<SrvfMatch> {
    let forward = align(a, b, opts)?;
    if opts.both_directions {
        let backward = align(b, a, opts)?;
        if backward.distance < forward.distance {
            return Ok(SrvfMatch { distance: backward.distance, registration: backward.registration, reversed: true });
        }
    }
    Ok(SrvfMatch { distance: forward.distance, registration: forward.registration, reversed: false })
}

/// `⟨target, registered source⟩`, exposed for callers building their own
/// search over registrations.
pub fn registered_inner(target: &[Point], source: &[Point], seed: usize, rotation: Rotation2, warp: &[f64]) -> f64 {
    let shifted = cyclic_shift(source, seed);
    let q = normalized(&rotate_all(&apply_warp(&shifted, warp), rotation));
    inner(target, &q)
}

#[cfg(test)]
mod tests {
    use super::super::tests::ellipse;
    use super::super::to_srvf;
    use super::*;
    use crate::outline::ShapeSample;
    use core::f64::consts::PI;

    fn blob(n: usize, phase: f64) -> ShapeSample {
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                let r = 1.0 + 0.25 * (3.0 * t + phase).cos() + 0.1 * (2.0 * t).sin();
                Point::new(r * t.cos(), r * t.sin())
            })
            .collect();
        ShapeSample::new("blob", None, pts).unwrap()
    }

    #[test]
    fn self_distance_is_zero() {
        let q = to_srvf(&blob(80, 0.0)).unwrap();
        let m = srvf_distance(&q, &q, &RegistrationOptions::default()).unwrap();
        assert!(m.distance < 1e-6);
        assert_eq!(m.registration.seed_shift, 0);
        assert!(m.registration.rotation.angle.abs() < 1e-12);
        for (w, e) in m.registration.warp.iter().zip(identity_warp(80)) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn rotation_and_shift_are_removed() {
        let a = blob(100, 0.3);
        let r = Rotation2::new(63f64.to_radians());
        let b = a.map_points(|p| r.apply(p)).shifted_start(25);
        let (qa, qb) = (to_srvf(&a).unwrap(), to_srvf(&b).unwrap());
        let m = srvf_distance(&qa, &qb, &RegistrationOptions::default()).unwrap();
        assert!(m.distance < 1e-3, "{}", m.distance);
    }

    #[test]
    fn symmetric_and_bounded() {
        let qa = to_srvf(&blob(60, 0.0)).unwrap();
        let qb = to_srvf(&ellipse(60, 2.0, 0.7)).unwrap();
        let opts = RegistrationOptions::default();
        let ab = srvf_distance(&qa, &qb, &opts).unwrap().distance;
        let ba = srvf_distance(&qb, &qa, &opts).unwrap().distance;
        assert!((ab - ba).abs() < 1e-6);
        assert!(ab > 0.0 && ab <= PI);
    }

    #[test]
    fn warp_is_monotone_with_fixed_ends() {
        let qa = to_srvf(&blob(50, 0.0)).unwrap();
        let qb = to_srvf(&blob(50, 1.0)).unwrap();
        let w = optimal_warp(&qa.q, &qb.q);
        assert_eq!(w[0], 0.0);
        assert_eq!(w[50], 1.0);
        assert!(w.windows(2).all(|p| p[1] >= p[0]));
        // DP never does worse than the identity warp.
        let id = identity_warp(50);
        let cost = |warp: &[f64]| {
            let v = apply_warp(&qb.q, warp);
            qa.q.iter().zip(&v).map(|(x, y)| (*x - *y).norm_sq()).sum::<f64>()
        };
        assert!(cost(&w) <= cost(&id) + 1e-12);
    }

    #[test]
    fn warping_reduces_distance_of_reparameterized_copy() {
        let n = 80;
        let pts = (0..n)
            .map(|i| {
                let s = i as f64 / n as f64;
                let t = 2.0 * PI * (s + 0.05 * (2.0 * PI * s).sin());
                Point::new(1.5 * t.cos(), t.sin())
            })
            .collect();
        let warped = ShapeSample::new("w", None, pts).unwrap();
        let plain = ellipse(n, 1.5, 1.0);
        let (qa, qb) = (to_srvf(&plain).unwrap(), to_srvf(&warped).unwrap());
        let rigid = srvf_distance(&qa, &qb, &RegistrationOptions { warp: false, ..Default::default() }).unwrap();
        let elastic = srvf_distance(&qa, &qb, &RegistrationOptions::default()).unwrap();
        assert!(elastic.distance < 0.5 * rigid.distance, "{} {}", elastic.distance, rigid.distance);
    }

    #[test]
    fn length_mismatch() {
        let qa = to_srvf(&blob(40, 0.0)).unwrap();
        let qb = to_srvf(&blob(41, 0.0)).unwrap();
        assert_eq!(srvf_distance(&qa, &qb, &RegistrationOptions::default()).unwrap_err(), Error::LengthMismatch(40, 41));
    }
}
