//! Numerical toolkit for Schrödinger operators with point interactions in ℝ³.
//!
//! The crate builds the `Γ_{α,Y}(z)` matrix and its spectral data, applies the
//! rank-N perturbed resolvent, evolves radial data with the explicit
//! single-center propagators, and measures dispersive decay rates against the
//! predicted `L^p → L^q` exponents.

pub mod cli;
pub mod config;
pub mod decay;
pub mod error;
pub mod gamma;
pub mod grid;
pub mod norms;
pub mod pitt;
pub mod propagator;
pub mod quadrature;
pub mod resolvent;

pub use config::{InteractionConfig, Point3, Strength, WeightSpec};
pub use error::{Error, Result};
pub use grid::{Field3D, RadialFunction, RadialGrid, ScalarField};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
