//! Numerical toolkit for parabolic equations driven by pseudo-differential
//! operators `A(t)` with symbols `ψ(t, ξ)` that are merely measurable in time.
//!
//! The crate is organised bottom-up:
//!
//! - [`symbols`]: symbol builders (fractional, `2m`-order, Lévy-type,
//!   compositions), evaluation and condition checks.
//! - [`partitions`]: the γ-adapted filtration of space-time dyadic cubes.
//! - [`grid`] and [`spectral`]: periodic lattices and the FFT plumbing.
//! - [`kernels`]: the kernels `p_λ` and `K`, and the kernel inequalities.
//! - [`solver`]: exact-in-time spectral integration of `u_t = A u − λ u + f`.
//! - [`forcing`]: grid-independent separable forcing terms.
//! - [`estimates`]: mixed norms and ensemble experiments.
//!
//! Everything is deterministic for a fixed seed, independent of the rayon
//! thread count.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod estimates;
pub mod forcing;
pub mod grid;
pub mod kernels;
pub mod partitions;
pub mod quadrature;
pub mod report;
pub mod solver;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};
pub use grid::{SpaceTimeGrid, SpatialGrid};

pub use report::EstimateReport;
pub use symbols::SymbolSpec;

/// Version of the JSON config schema understood by [`config`].
pub const CONFIG_SCHEMA_VERSION: &str = "1";
