//! Rigorously validated time-periodic solutions of the forced,
//! incompressible Navier-Stokes equations on the 3-torus, in the vorticity
//! formulation over space-time Fourier coefficients.

pub mod error;
pub mod postprocess;
pub mod solver;
pub mod spectral;
pub mod symmetry;
pub mod validator;
pub mod vfld;
pub mod vorticity;

pub use error::{Error, Result};
