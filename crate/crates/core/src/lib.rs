//! Floquet spectra of one-periodic non-self-adjoint Dirac operators
//! `ihσ₃∂ₓ + Q(x)` in the semiclassical regime.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod mat2;
pub mod oracle;
pub mod potentials;
pub mod spectrum;
pub mod symmetry;
pub mod transfer;

pub use error::{Error, Result};
pub use mat2::Mat2;
