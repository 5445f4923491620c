//! Spectral geometry on the noncommutative n-torus.
//!
//! The crate is organised bottom-up:
//!
//! * [`weyl`]: exact arithmetic in the smooth algebra A_Θ with finitely
//!   supported Fourier coefficients.
//! * [`clifford`]: gamma matrices, chirality and charge conjugation.
//! * [`operator`]: mode-level operators (Dirac, regular representations,
//!   covariant Dirac, gauge transformations) and dense truncations.
//! * [`zeta`]: twisted Epstein series, their meromorphic continuation and
//!   residues.
//! * [`diophantine`]: continued fractions, badly-approximable scans and
//!   Jarnik-type constructions.
//! * [`action`]: cutoff moments, heat traces, spectral-action fits and the
//!   noncommutative integrals behind the constant term.

// Checks written as `!(x > 0.0)` also reject NaN; keep them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod clifford;
pub mod diophantine;
mod error;
pub mod lattice;
pub mod operator;
pub mod special;
pub mod weyl;
pub mod zeta;

pub use error::{Error, Result};
pub use lattice::LatticePoint;
pub use num_complex::Complex64;
pub use weyl::{DeformationMatrix, FourierElement};

/// Version string embedded in CLI summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
