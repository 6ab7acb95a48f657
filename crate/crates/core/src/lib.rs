//! Pseudospectral simulation and verification toolkit for quasilinear
//! dispersive systems of the form
//!
//! ```text
//! ∂t u = -iω v
//! ∂t v = -iω u - iρ u²
//! ```
//!
//! with odd real Fourier multipliers ω and ρ, together with the slowly
//! modulated wave-packet (NLS) approximation of such systems: envelope
//! solver, packet assembly with second-order corrections, weight and
//! normal-form operators, and quantitative validity studies (residual
//! scaling, error-vs-approximation convergence, energy equivalence).

pub mod analysis;
pub mod approximation;
pub mod container;
pub mod error;
pub mod solver;
pub mod spectral;
pub mod symbols;
pub mod validation;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
