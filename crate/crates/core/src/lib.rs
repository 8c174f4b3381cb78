//! Numerical laboratory for reflected radial random walks, reflected Bessel
//! diffusions, and interval heat kernels.
//!
//! The crate has two halves. The discrete half ([`radial_chain`],
//! [`sphere_walk`]) computes exact n-step kernels of the lattice walks whose
//! norm approximates a reflected Bessel process, verifies their loop and
//! monotonicity structure, and simulates the full d-dimensional walk. The
//! continuous half ([`bessel_diffusion`], [`interval_kernels`], [`specfun`])
//! evaluates the free 2-d Bessel kernel in closed form, estimates reflected
//! diagonal densities by Euler-Maruyama Monte Carlo, and sums the interval
//! Neumann/Dirichlet eigenfunction series.

pub mod bessel_diffusion;
pub mod error;
pub mod interval_kernels;
pub mod radial_chain;
pub mod specfun;
pub mod sphere_walk;
pub mod stats;

pub use error::{Error, Result};
