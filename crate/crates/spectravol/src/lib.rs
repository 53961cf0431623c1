//! Deterministic volume approximation for spectrahedra.
//!
//! A spectrahedron is the set `S = {P >= 0 : tr(A_k P) = b_k, k = 1..m}` of
//! positive semidefinite matrices on an affine slice. This crate computes its
//! analytic center (the feasible point maximizing `log det P`), evaluates a
//! closed-form volume approximation built from the maximum-entropy Wishart
//! distribution centered there, checks when the approximation carries a
//! theoretical error guarantee, and validates everything at small scale
//! against exact formulas and Monte Carlo sampling.

pub mod center;
pub mod error;
pub mod families;
pub mod maxent;
pub mod oracle;
pub mod spectra;
pub mod symlin;
pub mod volume;

pub use error::{Error, Result};
