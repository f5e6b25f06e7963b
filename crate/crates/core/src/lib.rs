//! Floquet random quantum circuits and their quasi-energy statistics.
//!
//! The crate is organised bottom-up:
//!
//! - [`rng`]: reproducible substreams and Haar (CUE) sampling.
//! - [`perm`]: permutations, cycle types and integer partitions.
//! - [`weingarten`]: exact Weingarten function tables over the rationals and
//!   Haar moment integrals built on them.
//! - [`circuit`]: qudit lattices, gate orderings and dense Floquet operators.
//! - [`spectra`]: eigenphases, spectral form factors, two-level correlation
//!   estimates and the closed-form CUE and sigma-model predictions.
//! - [`moments`]: exact per-gate moment channels for whole circuits.
//!
//! Monte Carlo drivers split work over samples with one derived RNG stream per
//! sample and reduce in sample order, so results do not depend on the number
//! of worker threads.

pub mod circuit;
pub mod error;
pub mod moments;
pub mod perm;
pub mod rng;
pub mod spectra;
pub mod stats;
pub mod weingarten;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
