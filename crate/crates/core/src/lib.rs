//! Local-global analysis and solution counting for diagonal equations
//!
//! The library studies equations of the shape
//!
//! ```text
//! a_1 x_1^k + a_2 x_2^k + ... + a_s x_s^k = 0
//! ```
//!
//! with nonzero integer coefficients `a_j` and exponent `k >= 2`. It provides:
//!
//! - exact integer and lattice primitives ([`arith`], [`lattice`]),
//! - real and p-adic solubility tests with witnesses ([`local`]),
//! - density estimates from congruence counts and oscillatory integrals
//!   ([`singular`], [`archimedean`]),
//! - exact solution counting and small-solution search ([`counting`]),
//! - adversarial instance generators ([`forms`]),
//! - a reproducible experiment harness with seeded sampling, canonical
//!   serialization, and an append-only run store ([`harness`]).
//!
//! All randomness flows through [`arith::SeededStream`], so every experiment
//! is replayable from `(seed, stream index)` alone.

pub mod arith;
pub mod archimedean;
pub mod counting;
pub mod error;
pub mod forms;
pub mod harness;
pub mod lattice;
pub mod local;
pub mod singular;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
