//! Numerical laboratory for the distorted Fourier transform of half-line
//! Schrödinger operators `H = -d²/dr² + V(r)` with a Dirichlet condition at
//! the origin.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: radial and spectral grids, the dyadic bump, stencils.
//! * [`potentials`]: potential models (free, Aubin family, tabulated).
//! * [`jost`]: Volterra sweeps for the Jost modulation `m(r,k)`, scattering
//!   data at the origin, resonance detection and bound states.
//! * [`spectral`]: generalized eigenfunctions and the transform pair.
//! * [`pipeline`]: grids, solver, eigenbasis and bound states in one place.
//! * [`multiplier`]: spectral multipliers, their kernels and kernel bounds.
//! * [`lp`]: weighted `L^p` norms, `A_p` weights, operator-norm scans and
//!   the Littlewood-Paley square function.
//! * [`config`], [`io`], [`verify`]: run configuration, exports and the
//!   acceptance suite shared by the CLI and the test harness.

pub mod config;
pub mod io;
pub mod jost;
pub mod lp;
pub mod multiplier;
pub mod numerics;
pub mod pipeline;
pub mod potentials;
pub mod spectral;
pub mod verify;

mod error;

pub use error::{Error, Result};
pub use num_complex::Complex64;
