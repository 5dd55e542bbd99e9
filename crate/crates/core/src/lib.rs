//! Fourier restriction norms on periodic space-time lattices, the counterexample
//! families for the quadratic NLS `i u_t + Laplacian u = conj(u)^2`, and a Picard solver
//! for its Duhamel formulation.

pub mod checks;
pub mod dump;
mod error;
pub mod families;
pub mod norms;
pub mod random;
pub mod solver;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
