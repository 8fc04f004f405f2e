//! Monte Carlo laboratory for the local statistics of real zeros of random
//! trigonometric polynomials
//!
//! `X_n(t) = Σ_{k=1}^n ξ_k sin(kt) + η_k cos(kt)`.
//!
//! Zero counts of `X_n` in windows `[s + a/n, s + b/n]` are compared against
//! zero counts of the limit processes on `[a, b]`: the sinc-kernel Gaussian
//! process `Z`, the Gaussian process `G` for general covariance, and the
//! stable process `Z_ν` for heavy-tailed coefficients.

pub mod analysis;
pub mod angle;
pub mod error;
mod expansion;
pub mod limitproc;
mod quad;
pub mod rng;
pub mod rootfind;
pub mod runner;
pub mod sampling;
pub mod trigpoly;

pub use angle::{Angle, AngleClass};
pub use error::{Error, Result};
pub use rng::{Lane, StreamKey};
