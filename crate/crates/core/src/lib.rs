//! Fractional tempered stable motion: Volterra kernel, shot-noise series
//! simulation, characteristic functions, and Monte Carlo verification.

pub mod charfn;
pub mod error;
pub mod exec;
pub mod kernel;
pub mod measure;
pub mod quad;
pub mod rng;
pub mod series;
pub mod special;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
