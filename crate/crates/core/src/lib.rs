//! Numerical laboratory for the continuous resonant (CR) equation
//! `i ∂ₜ g = 𝒯(g, g, g)` in dimensions 2 and 3.
//!
//! Fields live on a centered lattice in frequency space with a dual
//! physical lattice; transforms use the unitary `(2π)^{-d/2}` convention.
//! The trilinear operator is evaluated through the physical-space
//! representation `𝒯 = (2π)^{d-1} ℱ ∫ e^{-isΔ}(|e^{isΔ}ǧ|² e^{isΔ}ǧ) ds`.

pub mod dynamics;
pub mod error;
pub mod grid;
pub mod init;
pub mod io;
pub mod norms;
pub mod operator;
pub mod oracle;
pub mod quadrature;
pub mod stationary;
pub mod symmetry;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{Field, GridSpec, Side};
pub use num_complex::Complex64;
pub use operator::{CubicOperator, Dealias, OperatorWorkspace};
pub use quadrature::{QuadratureRule, QuadratureScheme};
