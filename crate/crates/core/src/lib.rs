//! Generalized joint measurement of the non-normal two-boson operator
//! `Z = a1 + gamma a2^dag`.
//!
//! For `|gamma| != 1` the real and imaginary parts of `Z` do not commute and
//! cannot be read out by a joint quadrature measurement on the two modes. A
//! single ancilla mode `a3` mixed in through a three-mode linear network makes
//! the measured operator `T = a1 + gamma a2^dag + kappa a3^dag` normal while
//! keeping its first moments equal to those of `Z`.
//!
//! Modules:
//!
//! * [`network`]: canonical reduction of `gamma`, the 3x3 mixing matrix and its
//!   factorization into two-mode rotations.
//! * [`states`]: single-mode preparations with characteristic and Wigner
//!   functions.
//! * [`measurement`]: outcome statistics, moments, added noise and sampling.
//! * [`heterodyne`]: the frequency-asymmetric heterodyne application.
//! * [`grid`]: rectangular outcome grids, FFT inversion and convolutions.

pub mod error;
pub mod grid;
pub mod heterodyne;
pub mod measurement;
pub mod network;
pub mod states;

pub use error::{Error, Result};
pub use grid::{GridSpec, OutcomeGrid};
pub use measurement::Preparation;
pub use network::{GammaParam, MixingMatrix, Su2Plan};
pub use states::StatePrep;

pub use num_complex::Complex64;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
