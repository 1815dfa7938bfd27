//! Multivariate correlation (MCC) and uncorrelation (MUC) coefficients.

pub mod cli;
pub mod decomposition;
pub mod error;
pub mod geometry;
pub mod io;
pub mod ipd;
pub mod measures;
pub mod minors;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
