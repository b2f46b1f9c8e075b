//! Simulation and large-deviation toolkit for a random walk driven by a
//! speeded-up symmetric exclusion process on the discrete circle.

pub mod dynamics;
pub mod error;
pub mod fields;
pub mod harness;
pub mod hydro;
pub mod ldp;
pub mod model;
pub mod quad;
pub mod rng;
pub mod serde_ext;
pub mod stats;
pub mod testfn;

pub use error::{Error, Result};
