//! Sensitivity analysis for pairwise and listwise preference models.
//!
//! The crate covers the Bradley-Terry model, general pairwise models driven by a
//! [`LinkFunction`], and the K-tuple Plackett-Luce model. For each it provides
//! the composed-probability identities, their analytic partial derivatives, the
//! closed-form boundaries and areas of the M-sensitive regions, and independent
//! numerical oracles (finite differences, hit-or-miss Monte Carlo, quadrature,
//! brute-force enumeration) used to check every closed form.
//!
//! Dataset synthesis and maximum-likelihood fitting live here as well so the
//! whole pipeline runs without `std`. File formats and the command-line
//! frontend are in the `prefsens` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod contour;
pub mod dataset;
pub mod fitting;
pub mod link;
pub mod models;
pub mod oracles;
pub mod raster;
pub mod rng;
pub mod sensitivity;

pub use error::{Error, Result};
pub use link::{LinkFamily, LinkFunction};
pub use models::{KTuplePreference, Probability, RatioMatrix, ScoredOptionSet};
