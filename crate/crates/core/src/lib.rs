//! Numerical laboratory for the wave equation on the warped product
//! ℝ × (x₀, ∞) × 𝕊² with metric dx² + a(x)²dσ², a(x) = (x^{2m} + 1)^{1/(2m)},
//! and a Dirichlet wall at x₀.
//!
//! Fields are expanded in spherical harmonics and each mode is stored in the
//! conjugated variable w = a·u, where the spatial operator becomes
//! P_l = -d²/dx² + l(l+1)a^{-2} + a''/a.

pub mod error;
pub mod evolve;
pub mod geometry;
pub mod jet;
pub mod multiplier;
pub mod quasimode;
pub mod smooth;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
