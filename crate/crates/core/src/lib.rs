//! Weighted least-squares recovery and L2 sampling discretization for reproducing
//! kernel Hilbert spaces with finite trace, with exact worst-case error oracles.

pub mod analysis;
pub mod concentration;
pub mod density;
pub mod error;
pub mod experiment;
pub mod kernel;
pub mod linalg;
pub mod lsqr;
pub mod recovery;
pub mod rng;

pub use error::{Error, Result};
