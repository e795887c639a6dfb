//! Exact-arithmetic invariants of hermitian lattices over imaginary
//! quadratic fields.
//!
//! The crate computes, at desk scale and with no floating point anywhere:
//! local representation densities of hermitian forms by residue counting,
//! density polynomials and their central derivatives, Diff sets and local
//! Whittaker values, hermitian-lattice duals, genera, masses and
//! representation numbers, and the assembled Fourier-coefficient /
//! arithmetic-degree reports that tie them together.

pub mod cli;
pub mod density;
pub mod error;
pub mod hermitian;
pub mod quadfield;

pub use error::{Error, Result};
