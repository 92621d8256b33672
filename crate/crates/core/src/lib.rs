//! Simulation library for a symmetry-controlled photon-current switch:
//! a chain of three cavities coupled to two thermal baths, with a
//! laser-driven atom pair in the middle cavity.
//!
//! The crate builds the truncated Hilbert space and the Lindblad model,
//! assembles (tilted) Liouvillian superoperators, computes photon full
//! counting statistics via the spectral abscissa and its Legendre transform,
//! checks the atom-swap strong symmetry, and unravels the master equation
//! into quantum-jump Monte Carlo trajectories.

extern crate openblas_src;

pub mod dd;
pub mod eig;
pub mod error;
pub mod fcs;
pub mod hilbert;
pub mod model;
pub mod presets;
pub mod symmetry;
pub mod trajectory;

pub use error::{Error, Result};
