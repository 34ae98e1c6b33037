//! Extremal Forrelation instances and the machinery to check them.
//!
//! The crate is `no_std` (with `alloc`). It covers:
//!
//! - [`f2linalg`]: bit-packed vectors and matrices over F2, inversion, rank,
//!   and the random invertible / hard-matrix samplers.
//! - [`boolfun`]: ±1 truth tables, the integer Walsh-Hadamard transform,
//!   exact dyadic Forrelation, bentness and bent duals.
//! - [`instances`]: yes/no instance distributions built from
//!   Maiorana-McFarland bent functions under a random affine change of
//!   variables, with lazy point-query oracles.
//! - [`quantum`]: the one-query Forrelation circuit, in closed form and as a
//!   state-vector simulation.
//! - [`adversary`]: budgeted classical query strategies and Monte-Carlo
//!   advantage estimation.
//! - [`verifier`]: exhaustive and sampled checks of the structural facts the
//!   lower bound rests on.
//! - [`rorrelation`]: Forrelation with an arbitrary orthogonal matrix, Haar
//!   sampling and maximisation over sign vectors.
//!
//! Long computations are expressed as [`job::Job`]s: a fixed number of
//! independently seeded chunks whose tallies merge into a report. The result
//! does not depend on how chunks are scheduled.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod adversary;
pub mod boolfun;
mod error;
pub mod f2linalg;
pub mod instances;
pub mod job;
pub mod quantum;
pub mod rorrelation;
pub mod seed;
pub mod stats;
pub mod verifier;

pub use error::{Error, Result};

/// Seeded generator used everywhere randomness is needed.
pub type Rng = rand_chacha::ChaCha8Rng;
