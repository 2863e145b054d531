//! Numerical kernels for 2-D outline shape analysis.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It covers the
//! whole comparison pipeline:
//!
//! * [`outline`]: marching-squares contour extraction, vertical
//!   symmetrization, periodic-spline resampling and generalized Procrustes
//!   alignment.
//! * [`eigenshape`]: PCA over aligned coordinates and distances in a
//!   variance-thresholded score space.
//! * [`srvf`]: square-root velocity transform, elastic registration,
//!   geodesics on the pre-shape sphere and Karcher means.
//! * [`currents`]: finite coefficient embedding of a curve viewed as a
//!   1-current.
//! * [`lddmm`]: landmark diffeomorphic matching with a Gaussian kernel.
//! * [`classify`]: distance-matrix k-NN, weighted F1 and replicate evaluation.
//!
//! Parallel assembly of distance matrices and every file format live in the
//! `morphkit` crate.

#![no_std]
// Under test, std is linked and f64 gains inherent methods that shadow `Float`.
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
pub mod currents;
pub mod eigenshape;
mod error;
pub mod geometry;
pub mod lddmm;
pub mod outline;
pub mod srvf;

pub use classify::DistanceMatrix;
pub use error::{Error, Result};
pub use geometry::Point;
pub use outline::{Outline, PreShape, ShapeSample};
