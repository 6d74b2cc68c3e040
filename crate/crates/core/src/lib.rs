//! Numerical laboratory for Schrödinger eigenfunctions on the round
//! 2-sphere.
//!
//! The crate is organized around five layers:
//! - [`geom`] and [`quad`]: the sphere, its space of oriented great circles,
//!   and quadrature grids;
//! - [`harmonics`] and [`potential`]: real spherical harmonics and smooth
//!   potentials;
//! - [`radon`]: the great-circle Radon transform, its critical points, and
//!   the geometric hypothesis checker;
//! - [`flow`]: the Hamiltonian flow of the Radon field on geodesic space,
//!   occupancy averages, and empirical scaling exponents;
//! - [`spectral`] and [`norms`]: the Schrödinger operator in the harmonic
//!   basis, spectral multipliers and cluster statistics, and localized
//!   L^p / mass measurements.
//!
//! See the crate `examples/` directory for one runnable walkthrough per
//! capability, and the `radonlab` binary for a batch front end.

pub mod error;
pub mod geom;
pub mod harmonics;
pub mod potential;
pub mod quad;

pub mod radon;

pub mod flow;

pub mod spectral;

pub mod norms;

pub mod config;

pub use error::{Error, Result};
