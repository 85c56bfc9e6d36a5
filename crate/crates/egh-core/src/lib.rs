//! Desk-scale laboratory for equivariant Gromov-Hausdorff convergence.
//!
//! Everything works on finite data: finite pointed metric spaces, their
//! isometry groups as permutations, correspondences realizing (equivariant)
//! Gromov-Hausdorff distances, approximation maps between groups with the
//! five regular-neighborhood conditions, escape norms with their algebra
//! counterparts, and an antipodally-symmetric piecewise-linear near-zero
//! finder on spheres.
//!
//! The crate is `no_std` + `alloc`; all IO, file formats and the CLI live in
//! the companion `egh-lab` crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod approx;
pub mod borsuk;
pub mod escape;
pub mod gh;
pub mod group;
pub mod iso;
pub(crate) mod lp;
pub(crate) mod math;
pub mod metric;
pub mod scenarios;

/// Hard cap on enumerated group orders. Scenario groups stay far below it.
pub const GROUP_SIZE_CAP: usize = 10_080;

/// Absolute tolerance for metric-axiom validation on desk-scale inputs.
pub const TOL_METRIC: f64 = 1e-9;

/// Bisection tolerance for Gromov-Hausdorff epsilon searches.
pub const TOL_GH: f64 = 1e-6;
