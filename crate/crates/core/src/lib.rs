//! Block mutual information and Hilberg exponents for nonergodic sources.
//!
//! The crate covers three processes with exactly computable measures:
//! the uniform mixture of Bernoulli processes, the Santa Fe process, and a
//! modified Santa Fe process whose index weights switch on and off in
//! blocks. For each it provides
//!
//! - seeded two-sided window samplers ([`sampling`]),
//! - exact log-probabilities and expected block mutual information
//!   ([`measures`]),
//! - pointwise mutual information between adjacent blocks ([`pmi`]),
//! - computable prefix codes used as incomplete measures ([`codes`]),
//! - estimators of the random, expected and inverse Hilberg exponents
//!   ([`exponents`]).
//!
//! All information quantities are in bits.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN fails domain checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod codes;
mod error;
pub mod exponents;
pub mod measures;
pub mod pmi;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
