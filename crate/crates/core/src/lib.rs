//! Numerical core for the time-fractional wave equation
//! D^α_{0+}(u - u₀ - t u₁) - Δu = f on an interval, 1 < α < 2.
//!
//! The crate provides Riemann-Liouville calculus on uniform time grids,
//! Mittag-Leffler evaluation, two solvers for the scalar mode equation,
//! discrete fractional Sobolev norms and a spectral Galerkin solver.

pub mod dd;
pub mod error;
pub mod frac_calculus;
pub mod galerkin;
pub mod grid;
pub mod mittag_leffler;
pub mod mode_solver;
pub mod quadrature;
pub mod sobolev;
pub mod special;
pub mod trend;

pub use error::{FracError, Result};
pub use grid::{GridFunction, TimeGrid};
