//! Certified two-sided bounds for the lowest eigenvalues of `-Δ + V` on the
//! plane with polynomial confining potentials.
//!
//! The pipeline truncates the plane to a disk, computes upper bounds with a
//! conforming P1 Dirichlet discretization and lower bounds with a Neumann
//! composite enriched Crouzeix–Raviart (CECR) discretization, then corrects
//! the lower side for the interpolation error and for the exterior of the
//! disk.

pub mod bounds;
pub mod cli;
pub mod eigsolve;
pub mod error;
pub mod fem_cecr;
pub mod fem_p1;
pub mod mesh;
pub mod pencil;
pub mod potential;

pub use error::{Error, Result};
