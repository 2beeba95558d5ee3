//! Equilibria, linearized spectra, and radially symmetric nonlinear dynamics
//! of the thermodynamically consistent two-phase Stefan problem with
//! temperature-dependent surface tension.
//!
//! Module map:
//! - [`material`]: coefficient families, derived thermodynamic quantities,
//!   model validation, and the surface antiderivatives `f_Γ`, `h_Γ`.
//! - [`equilibrium`]: the sphere-equilibrium family, the equilibrium energy
//!   curve `E_e(u)`, and the stability indicators `ζ*`, `η*`.
//! - [`spectral`]: per-mode Dirichlet-to-Neumann values, the reduced scalar
//!   `B_λ`, and positive-eigenvalue enumeration for the linearization.
//! - [`simulate`]: interface-fitted radial solver for both the kinetic
//!   undercooling and the no-undercooling regime, with energy/entropy
//!   diagnostics.
//! - [`hanzawa`]: height-function geometry kernels over a reference sphere
//!   (normal, mean curvature, linearized curvature).
//! - [`files`]: JSON wire formats shared with the command line tool.

pub mod equilibrium;
pub mod files;
pub mod hanzawa;
pub mod material;
pub mod num;
pub mod presets;
pub mod simulate;
pub mod spectral;


pub use material::{CoefficientFunction, DerivedQuantities, MaterialModel, ValidationReport};


