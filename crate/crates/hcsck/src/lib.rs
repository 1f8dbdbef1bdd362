//! Numerical solvers for the Hitchin-cscK moment-map equations in symplectic
//! coordinates: torus spectral solvers, translation-invariant reductions,
//! ruled-surface collocation and toric stability functionals.

pub mod chebyshev;
pub mod checks;
pub mod error;
pub mod grid;
pub mod higgs;
pub mod hk_torus;
pub mod invariant1d;
pub mod potentials;
pub mod ruled;
pub mod spectral;
pub mod toric;

pub use error::{Error, PolytopeError, Result};
