//! Exponential sums evaluated at Farey fractions, and numerical checks of
//! lower bounds of large-sieve type.
//!
//! The crate is organised bottom-up:
//!
//! - [`coeffs`]: coefficient vectors and seeded random ensembles.
//! - [`expsum`]: evaluation of `S(α) = Σ aₙ e(nα)`, its derivative, all Farey
//!   points at once, grid spectra and exact fourth moments.
//! - [`farey`]: exact Farey combinatorics, the covering count `R(u)` and the
//!   uncovered set `m(Q, A)` with exact rational measure.
//! - [`bounds`]: energy concentration `M(x)` brackets, the lower-bound
//!   inequality, and the Monte Carlo experiments built on top.
//! - [`cli`]: the command-line front end and report emission.

pub mod bounds;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod expsum;
pub mod farey;
pub mod report;

pub use error::{Error, Result};
