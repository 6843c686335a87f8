//! Exact truncated generalized power series, contracting derivations and
//! formal conjugacy of parabolic series.

pub mod calculus;
pub mod cli;
pub mod conjugacy;
pub mod error;
pub mod exponents;
pub mod group;
pub mod series;

pub use error::{Error, Result};
