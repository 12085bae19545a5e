//! Spectral theory of general sample covariance matrices `Q = T X X* T*` and
//! deformed Wigner matrices `W + A`, together with Monte Carlo harnesses that
//! check local laws, eigenvalue rigidity and edge statistics at finite `N`.
//!
//! The crate is organized bottom-up:
//!
//! - [`model_core`]: the population model `(phi, pi)`, the inverse map `f`, the
//!   Stieltjes transform `m(z)`, spectral edges, densities, quantiles and
//!   regularity diagnostics.
//! - [`equivalents`]: deterministic equivalents of the block resolvent, the
//!   error scale `Psi(z)`, the Wigner counterparts and spectral domains.
//! - [`sampler`]: reproducible random ensembles and the Bernoulli
//!   interpolation together with its moment coefficients.
//! - [`resolvent_lab`]: the block resolvent evaluated through one singular
//!   value decomposition, exact resolvent identities and local-law scans.
//! - [`statistics`]: rigidity, gap and edge-statistics experiments.

pub mod covariance;
pub mod equivalents;
pub mod error;
pub mod linalg;
pub mod model_core;
pub mod quadrature;
pub mod resolvent_lab;
pub mod sampler;
pub mod statistics;

pub use error::{Error, Result};
pub use num_complex::Complex64;
