//! Numerics for the Dunkl harmonic oscillator `L = -Δ_α + ‖x‖²` attached to the
//! reflection group Z₂^d.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Laguerre polynomials, the regularised modified Bessel function
//!   `I_ν(z)/z^ν` and the Gamma function on real and complex arguments.
//! * [`measure`]: the weight `w_α`, Gauss-type quadrature rules (including the
//!   Jacobi-type `Π_α` measures on `[-1,1]`), half-ball volumes.
//! * [`hermite`]: generalized Hermite functions, Dunkl operators, spectral
//!   projections.
//! * [`heat`]: heat kernel in closed, series and ζ-integral form.
//! * [`imagpow`]: the imaginary powers `L^{-iγ}` and their kernels.
//! * [`czverify`]: empirical constants for the standard kernel estimates.
//! * [`suites`]: the verification suites driven by the CLI and the acceptance
//!   test target.

pub mod czverify;
pub mod error;
pub mod fixtures;
pub mod heat;
pub mod hermite;
pub mod imagpow;
pub mod measure;
pub mod specfun;
pub mod suites;

pub use error::{Error, Result};
pub use num_complex::Complex64;
