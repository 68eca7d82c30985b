//! Numerical toolkit for Jacobi operators `J(λ)` with off-diagonal `a_n` and
//! diagonal `λ f_n`, whose `λ → 0` limit is in the limit-circle case.
//!
//! Modules follow the pipeline: coefficient families → recurrence solutions →
//! spectra and Weyl functions → extension-selecting coupling sequences →
//! turning-point asymptotics → higher-order squeezing dynamics.

pub mod accel;
pub mod asymptotics;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod limits;
pub mod recurrence;
pub mod spectral;
pub mod squeezing;
pub mod tridiag;

pub use error::{Error, Result};
pub use num_complex::Complex64;
