//! Lattice, configurations, jump rates and the measures built on them.

pub mod config;
pub mod ensembles;
pub mod lattice;
pub mod local;
pub mod measures;
pub mod profile;
pub mod velocity;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use config::Configuration;
pub use ensembles::{canonical_average, ensembles_gap};
pub use lattice::TorusLattice;
pub use local::{parse_rational, LocalFunction, LocalRate};
pub use measures::{
    sample_bernoulli, sample_canonical, sample_product_profile, sample_tilted_initial, InitialState,
    TiltedInitial,
};
pub use profile::DensityProfile;
pub use velocity::{mean_field_velocity, MeanField, Polynomial, Velocity};

/// Exchange-rate convention: each unordered neighbour pair swaps at rate
/// `D n^2`. `D = 1` gives the heat equation `u_t = u_xx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Diffusion(u8);

impl Diffusion {
    pub const ONE: Diffusion = Diffusion(1);
    pub const TWO: Diffusion = Diffusion(2);

    pub fn new(d: u8) -> Result<Self> {
        match d {
            1 | 2 => Ok(Diffusion(d)),
            _ => Err(Error::InvalidArgument(format!("diffusion coefficient must be 1 or 2, got {d}"))),
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0 as f64
    }
}

impl Default for Diffusion {
    fn default() -> Self {
        Diffusion::ONE
    }
}

impl TryFrom<u8> for Diffusion {
    type Error = Error;
    fn try_from(d: u8) -> Result<Self> {
        Diffusion::new(d)
    }
}

impl From<Diffusion> for u8 {
    fn from(d: Diffusion) -> u8 {
        d.0
    }
}
