//! Finite element solver for the time-fractional Cable equation using
//! fractional θ-method convolution weights.

pub mod error;
pub mod fem;
pub mod harness;
pub mod linalg;
pub mod quadrature;
pub mod solver;
pub mod specfun;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
