//! Mean first passage time (MFPT) of planar Brownian motion to a small
//! elliptical absorbing trap inside a reflecting domain.
//!
//! The crate provides three layers:
//!
//! * [`greens`] — Neumann Green's functions (closed form on the disk, rapidly
//!   convergent series on rectangles and ellipses) together with the gradient
//!   and Hessian data the expansion needs;
//! * [`asymptotics`] — the two-term small-trap expansion of the MFPT and its
//!   domain average (GMFPT), closed-form disk specializations, and the trap
//!   orientation optimizer;
//! * [`montecarlo`] — an independent Brownian-dynamics estimator (reflecting
//!   outer boundary, absorbing trap) used to validate the expansion.
//!
//! Heavy loops (walker ensembles, orientation fields) run data-parallel via
//! rayon when the default `parallel` feature is on; a sequential fallback is
//! compiled in either way and both paths produce bit-identical results.

pub mod asymptotics;
pub mod error;
pub mod geometry;
pub mod greens;
pub mod moments;
pub mod montecarlo;

pub use error::{Error, Result};
pub use geometry::{DomainSpec, EllipseFrame, Point2, SymMat2, TrapSpec};
