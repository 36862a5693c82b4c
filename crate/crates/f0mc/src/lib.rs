//! Distinct-count sketches and hashing-based model counters on one substrate.
//!
//! The crate implements three strategies for estimating the number of
//! distinct elements (F0) of a stream — Bucketing, Minimum, and Estimation —
//! and the matching formula-side counters that build the same sketches from a
//! DNF or CNF description of the set instead of from its elements. On top of
//! those sit estimators for structured set streams (DNF sets, multi-
//! dimensional ranges, arithmetic progressions, affine spaces, weighted DNF)
//! and an in-process simulation of distributed DNF counting with exact
//! communication accounting.
//!
//! Layering, bottom up:
//!
//! - [`gf2`]: bit vectors and matrices over GF(2), Gaussian elimination,
//!   affine-system solving, and GF(2^n) field arithmetic.
//! - [`hashing`]: the Toeplitz, xor, and polynomial hash families with
//!   prefix slicing and trailing-zero utilities.
//! - [`formula`]: DNF/CNF model, parsers, term-to-affine compilation, and
//!   exact brute-force oracles.
//! - [`f0stream`]: the streaming architecture — per-strategy sketches,
//!   update rules, and estimate computation.
//! - [`solvers`]: BoundedSAT, FindMin, FindMaxRange, AffineFindMin, and the
//!   NP-oracle abstraction.
//! - [`counting`]: the model counters assembled from the solvers.
//! - [`setstream`]: structured set streams compiled down to DNF streams.
//! - [`dist`]: coordinator/site protocols with per-message byte accounting.
//! - [`harness`]: statistical acceptance machinery and bridge-equivalence
//!   checks shared by the test suites.
//!
//! Every randomized entry point takes an explicit `u64` seed and is
//! bit-reproducible: the only randomness source is a seeded ChaCha8 stream.

pub mod counting;
pub mod dist;
mod error;
pub mod f0stream;
pub mod formula;
pub mod gf2;
pub mod harness;
pub mod hashing;
pub mod setstream;
pub mod solvers;

pub use error::{Error, Result};
