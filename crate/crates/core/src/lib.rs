//! Nonadiabatic transition probabilities for two-level level-crossing models.
//!
//! The crate covers the superparabolic level-glancing family `ε(t) = t^N`,
//! `V = α` and the parabolic model `ε(t) = (A t² − B)/2`, `V = V0`, and
//! evaluates the final transition probability three ways:
//!
//! * [`propagator`]: adaptive numerical integration of the two-level
//!   Schrödinger equation, the reference answer;
//! * [`ddp`]: the generalized Dykhne-Davis-Pechukas coherent sum over the
//!   complex zero points of the adiabatic gap;
//! * [`znt`]: the Zhu-Nakamura double-crossing and tunneling formulas.
//!
//! [`harness`] runs parameter sweeps over α (in parallel when the `parallel`
//! feature is enabled) and compares the methods against each other.
//!
//! Units have ℏ = 1 throughout.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Published coefficients and reference values keep all their digits.
#![allow(clippy::excessive_precision)]

pub mod config;
pub mod ddp;
mod error;
pub mod harness;
pub mod models;
pub mod numerics;
pub mod propagator;
pub mod specialfn;
pub mod znt;

pub use error::{Error, Result};
pub use models::{DiabaticModel, TwoLevelSystem};
pub use num_complex::Complex64;
