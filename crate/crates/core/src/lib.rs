//! Multifractal spectra of Birkhoff averages for affine graph directed Markov
//! systems with locally constant potentials.
//!
//! The crate evaluates the two-parameter pressure `P(t, q)`, builds Gibbs and
//! equilibrium states, and solves `P(t, q) = q xi`, `dP/dq(t, q) = xi` for the
//! dimension spectrum `t(xi)`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod builtin;
pub mod cycle;
pub mod error;
pub mod extended;
pub mod gibbs;
pub mod perron;
pub mod pressure;
pub mod root;
pub mod spectrum;
pub mod system;

pub use error::{Error, Result};
pub use extended::ExtReal;
